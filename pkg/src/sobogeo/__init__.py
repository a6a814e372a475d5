"""Constant-coefficient Sobolev metrics on immersed closed plane curves."""
from .kernels import BACKEND
from .errors import (BadShape, BlowUpDetected, EnergyDriftExceeded, ImmersionViolation,
                     IntegrationAborted, NoConvergence, OrderTooHigh, OrderTooLow,
                     ShapeMismatch, SingularOperator, SobogeoError, StallWarning, StepUnstable)
from .curve import (Curve, GeometryCache, build_curve, constant_speed, ds, fourier_interp,
                    geometry, integrate_ds, variation_dsk, variation_frenet)
from .metric import (MetricCoeffs, apply_L, apply_Lbar, embedding_constant, hk_norm,
                     invert_Lbar, metric_eval)
from .geodesic import (GeodesicState, SolverConfig, Trajectory, circle_oracle, energy_drift,
                       h_quadratic, metric_derivative_check, rhs, shoot)
from .analysis import (BallContext, BoundReport, ball_constants, blowup_length, path_checks,
                       poincare_report)
from .bvp import DiscretePath, distance_bracket, linear_path, minimize_path, path_energy
from .shapes import generate

__version__ = "0.1.0"
