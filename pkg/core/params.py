"""
Paramètres du processus du télégraphe
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class V0(str, Enum):
    """Vitesse initiale: +c, -c ou mélange équiprobable"""
    PLUS = "plus"
    MINUS = "minus"
    SYMMETRIC = "symmetric"

    @property
    def sign(self) -> int:
        """Signe de la vitesse initiale (0 pour le mélange)"""
        return {V0.PLUS: 1, V0.MINUS: -1, V0.SYMMETRIC: 0}[self]

    def opposite(self) -> "V0":
        """Signe opposé, le mélange est invariant"""
        return {V0.PLUS: V0.MINUS, V0.MINUS: V0.PLUS, V0.SYMMETRIC: V0.SYMMETRIC}[self]


class TelegraphParams(BaseModel):
    """Taux de renversement, vitesse, horizon et vitesse initiale"""

    model_config = ConfigDict(frozen=True, populate_by_name=True, allow_inf_nan=False)

    lam: float = Field(alias="lambda", gt=0)
    c: float = Field(gt=0)
    T: float = Field(gt=0)
    v0: V0 = V0.SYMMETRIC

    @property
    def lambda_T(self) -> float:
        return self.lam * self.T

    def hitting_threshold(self, x: float) -> float:
        """Seuil balistique T0 = |x| / c"""
        return abs(x) / self.c

    def with_horizon(self, T: float) -> "TelegraphParams":
        return self.model_copy(update={"T": T})

    def with_v0(self, v0: V0) -> "TelegraphParams":
        return self.model_copy(update={"v0": v0})

    def describe(self) -> dict:
        """Métadonnées sérialisables"""
        return {"lambda": self.lam, "c": self.c, "T": self.T, "v0": self.v0.value}
