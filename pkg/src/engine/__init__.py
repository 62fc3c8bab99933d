from .behavior import bell_value, check_no_signalling, quantum_behavior
from .crypto_nonlocal import MembershipStatus, maximize_bell, membership_lp
from .lp import solve, verify_certificate
from .separability import ppt_check
from .validator import ModelValidator

__all__ = [
    "bell_value",
    "check_no_signalling",
    "quantum_behavior",
    "MembershipStatus",
    "maximize_bell",
    "membership_lp",
    "solve",
    "verify_certificate",
    "ppt_check",
    "ModelValidator",
]
