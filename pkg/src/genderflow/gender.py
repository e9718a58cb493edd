"""Gender labels shared across filters, analyzers and metrics."""

from __future__ import annotations

from enum import Enum


class Gender(str, Enum):
    """Gender label.

    ``NEUT`` doubles as the neuter grammatical gender and the WinoMT
    "neutral" gold class. ``NONE`` is "no gender" for morphology and
    "unknown" for predictions.
    """

    FEM = "fem"
    MSC = "msc"
    NEUT = "neut"
    NONE = "none"

    def opposite(self) -> "Gender":
        if self is Gender.FEM:
            return Gender.MSC
        if self is Gender.MSC:
            return Gender.FEM
        raise ValueError(f"{self.value!r} has no opposite gender")

    @classmethod
    def parse(cls, text: str) -> "Gender":
        try:
            return _ALIASES[text.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown gender label {text!r}") from None


_ALIASES = {
    "f": Gender.FEM,
    "fem": Gender.FEM,
    "female": Gender.FEM,
    "feminine": Gender.FEM,
    "m": Gender.MSC,
    "msc": Gender.MSC,
    "male": Gender.MSC,
    "masculine": Gender.MSC,
    "n": Gender.NEUT,
    "neut": Gender.NEUT,
    "neuter": Gender.NEUT,
    "neutral": Gender.NEUT,
    "-": Gender.NONE,
    "none": Gender.NONE,
    "unknown": Gender.NONE,
}


def binary_gender(text: str) -> Gender:
    """Parse a gender that must be FEM or MSC (filter targets)."""
    g = Gender.parse(text)
    if g not in (Gender.FEM, Gender.MSC):
        raise ValueError(f"expected fem or msc, got {text!r}")
    return g
