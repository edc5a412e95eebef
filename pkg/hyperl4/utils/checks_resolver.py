"""
Check resolution for the acceptance suite.

All checks are registered in CHECK_REGISTRY by name; the suite config may
only name checks found here.
"""

import logging

from hyperl4.checks.arithmetic_checks import (
    ParabolaCheck,
    PerpFrameCheck,
    SliceCaseCheck,
)
from hyperl4.checks.base import AbstractCheck
from hyperl4.checks.hnls_checks import IllPosedCheck, IntegratorCheck
from hyperl4.checks.incidence_checks import IncidenceCheck
from hyperl4.checks.lattice_checks import ConeEnumerationCheck
from hyperl4.checks.resonance_checks import (
    BilinearCheck,
    DiameterBoundCheck,
    LineClosedFormCheck,
    Omega1GrowthCheck,
    OracleEquivalenceCheck,
    PlaneRestrictedCheck,
)
from hyperl4.checks.strichartz_checks import (
    CubeGoldenCheck,
    CubeScalingCheck,
    GoodBadCheck,
    LineScalingCheck,
    MainEstimateCheck,
    ProductScalingCheck,
    QuadratureCheck,
)

type ChecksDict = dict[str, AbstractCheck]

CHECK_REGISTRY: dict[str, type[AbstractCheck]] = {
    cls.name: cls
    for cls in (
        OracleEquivalenceCheck,
        LineClosedFormCheck,
        LineScalingCheck,
        CubeScalingCheck,
        ProductScalingCheck,
        MainEstimateCheck,
        ConeEnumerationCheck,
        DiameterBoundCheck,
        Omega1GrowthCheck,
        ParabolaCheck,
        IncidenceCheck,
        BilinearCheck,
        QuadratureCheck,
        IllPosedCheck,
        IntegratorCheck,
        CubeGoldenCheck,
        GoodBadCheck,
        SliceCaseCheck,
        PerpFrameCheck,
        PlaneRestrictedCheck,
    )
}


def resolve_checks(names: list[str]) -> ChecksDict:
    """Instantiate the named checks; unknown names are logged and skipped."""
    loaded: ChecksDict = {}
    for name in names:
        if name not in CHECK_REGISTRY:
            logging.error(
                f"Check '{name}' not found in registry. "
                f"Available checks: {get_available_checks()}"
            )
            continue
        loaded[name] = CHECK_REGISTRY[name]()
        logging.debug(f"Resolved {name} -> {loaded[name].__class__.__name__}")
    return loaded


def get_available_checks() -> list[str]:
    return sorted(CHECK_REGISTRY)


def check_defaults() -> dict[str, dict]:
    """Default parameters per check; suite configs are validated against them."""
    return {name: dict(cls.defaults) for name, cls in CHECK_REGISTRY.items()}
