"""Reference constants.

Values are stored to 20 significant digits (OEIS A001620, A077761,
A006752, A002117); double precision keeps about 16 of them.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

EULER_GAMMA = 0.57721566490153286061
MEISSEL_MERTENS = 0.26149721284764278375
CATALAN = 0.91596559417721901505
ZETA3 = 1.2020569031595942854

# values quoted alongside the verification runs; used for cross-checks only
QUOTED = {
    "euler_gamma": 0.577215665,
    "meissel_mertens": 0.2614972,
    "pi_exp_gamma_plus_m_over_4": 1.8169017889,
    "exp_gamma_minus_m": 1.3712441303,
    "theta_constant": 0.50904,
    "rho_text": 0.76774,
    "rho_fit": 0.76770,
    "fit_slope": 1.371247673,
    "fit_intercept": 0.7676022888,
    "gamma_1": 0.8225,
}


@dataclass(frozen=True)
class ConstantsTable:
    pi: float = math.pi
    e: float = math.e
    euler_gamma: float = EULER_GAMMA
    meissel_mertens: float = MEISSEL_MERTENS
    catalan: float = CATALAN
    zeta3: float = ZETA3

    @property
    def pi_exp_gamma_over_4(self) -> float:
        return self.pi * math.exp(self.euler_gamma) / 4.0

    @property
    def pi_exp_gamma_plus_m_over_4(self) -> float:
        return self.pi * math.exp(self.euler_gamma + self.meissel_mertens) / 4.0

    @property
    def exp_gamma_minus_m(self) -> float:
        return math.exp(self.euler_gamma - self.meissel_mertens)

    @property
    def atan_sq_over_x_integral(self) -> float:
        """Closed form of the integral of atan(x)**2 / x over [0, 1]."""
        return 0.5 * self.pi * self.catalan - 0.875 * self.zeta3

    @property
    def zeros_target(self) -> float:
        """Limit of the zero-ordinate sum normalised by ln(n)**2."""
        return math.exp(self.euler_gamma + self.meissel_mertens) / 4.0 * (
            self.catalan - 7.0 * self.zeta3 / (4.0 * self.pi)
        )

    @property
    def zeta2_over_2(self) -> float:
        return self.pi**2 / 12.0

    def as_dict(self) -> dict[str, float]:
        out = asdict(self)
        for name in (
            "pi_exp_gamma_over_4",
            "pi_exp_gamma_plus_m_over_4",
            "exp_gamma_minus_m",
            "atan_sq_over_x_integral",
            "zeros_target",
            "zeta2_over_2",
        ):
            out[name] = getattr(self, name)
        return out


CONSTANTS = ConstantsTable()
