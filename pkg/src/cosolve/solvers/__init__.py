"""The four cooperating solvers."""
from .arith import ArithSolver, ArithStore, proj_a, tell_a
from .fd import FDSolver, FDStore, proj_fd_strong, proj_fd_weak, tell_fd
from .fl import FLSolver, proj_fl, tell_fl
from .language import SubstStore
from .lp import LPSolver, proj_l, tell_l

__all__ = [
    "ArithSolver",
    "ArithStore",
    "FDSolver",
    "FDStore",
    "FLSolver",
    "LPSolver",
    "SubstStore",
    "proj_a",
    "proj_fd_strong",
    "proj_fd_weak",
    "proj_fl",
    "proj_l",
    "tell_a",
    "tell_fd",
    "tell_fl",
    "tell_l",
]
