"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter or query time lies outside the domain where it is valid."""


class KappaDomainError(DomainError):
    """The kappa constant does not exceed 1."""


def check_kappa(kappa: float) -> float:
    kappa = float(kappa)
    if not kappa > 1.0:
        raise KappaDomainError(f"kappa must exceed 1 (got {kappa!r})")
    return kappa


def check_nu(nu: float) -> float:
    nu = float(nu)
    if not 0.0 < nu <= 0.5:
        raise DomainError(f"nu must lie in (0, 1/2] (got {nu!r})")
    return nu
