"""LnsConfig class and heuristic selection for configuring LNS runs."""

from __future__ import annotations

from enum import Enum
from typing import Any

import attrs

from ._exact import SolveBudget


class Heuristic(Enum):
    """Approaches a run can use.

    ``BNB`` is not a destroy heuristic: it runs branch-and-bound on the whole
    instance as a baseline.
    """

    RANDOM = "RANDOM"
    GRAPH = "GRAPH"
    LB = "LB"
    LBRELAX = "LBRELAX"
    LBRELAX_S = "LBRELAX_S"
    LBRELAX_RR = "LBRELAX_RR"
    BNB = "BNB"

    @property
    def is_lns(self) -> bool:
        return self is not Heuristic.BNB

    @classmethod
    def lns_heuristics(cls) -> tuple[Heuristic, ...]:
        return tuple(h for h in cls if h.is_lns)


def _convert_heuristic(value: Heuristic | str) -> Heuristic:
    """Convert and validate a heuristic name.

    Accepts enum members or names in any case, with ``-`` in place of ``_``
    and the compact spellings ``LBRELAXS`` / ``LBRELAXRR``.

    Raises
    ------
    TypeError
        If value is not a Heuristic enum or string.
    ValueError
        If the string does not name a heuristic.
    """
    if isinstance(value, Heuristic):
        return value
    if isinstance(value, str):
        key = value.strip().upper().replace("-", "_")
        key = {"LBRELAXS": "LBRELAX_S", "LBRELAXRR": "LBRELAX_RR", "LB_RELAX": "LBRELAX"}.get(key, key)
        key = key.replace("LB_RELAX_", "LBRELAX_")
        try:
            return Heuristic(key)
        except ValueError:
            valid = [h.value for h in Heuristic]
            raise ValueError(f"Invalid heuristic '{value}'. Valid options: {valid}") from None
    raise TypeError("heuristic must be a Heuristic enum or string")


FAMILIES = ("mvc", "mis", "sc", "mk")
PRESETS = ("desk", "full")

# Alternative preset names accepted wherever a preset is named.
PRESET_ALIASES = {"paper-mini": "desk", "paper-full": "full"}

# Initial neighborhood size per family; the desk preset scales the full one by about 1/13.
K0_PRESETS = {
    "desk": {"mvc": 30, "mis": 20, "sc": 15, "mk": 30},
    "full": {"mvc": 400, "mis": 200, "sc": 150, "mk": 400},
}


def _convert_preset(value: str) -> str:
    """Canonical preset name of ``value``, resolving aliases.

    Raises
    ------
    TypeError
        If value is not a string.
    ValueError
        If the string names no preset.
    """
    if not isinstance(value, str):
        raise TypeError("preset must be a string")
    key = value.strip().lower()
    key = PRESET_ALIASES.get(key, key)
    if key not in PRESETS:
        raise ValueError(f"Invalid preset '{value}'. Valid options: {[*PRESETS, *PRESET_ALIASES]}")
    return key


def _check_family(family: str) -> str:
    family = family.lower()
    if family not in FAMILIES:
        raise ValueError(f"Invalid family '{family}'. Valid options: {list(FAMILIES)}")
    return family


def _serialize(inst: Any, field: Any, value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    return value


@attrs.frozen
class LnsConfig:
    """Configuration of one LNS run.

    Parameters
    ----------
    heuristic : Heuristic or str, default=Heuristic.RANDOM
        Destroy heuristic, or ``BNB`` for the branch-and-bound baseline.
    k0 : int, default=30
        Initial neighborhood size.
    alpha : float, default=1.02
        Growth factor of the neighborhood size after a non-improving iteration (> 1).
    beta : float, default=0.5
        Cap on the neighborhood size as a fraction of the variable count (0 < beta <= 1).
    gamma : float, default=30.0
        Minimum seconds LBRELAX_RR spends in its randomized phase.
    repair_budget : SolveBudget
        Budget of every repair solve.
    lb_repair_budget : SolveBudget
        Budget of the Local Branching ILP solve of the ``LB`` heuristic.
    initial_budget : SolveBudget
        Budget of the initial-solution search.
    time_limit : float or None, default=120.0
        Wall-clock horizon of the run in seconds, initial solution included.
    iteration_limit : int or None, default=None
        Cap on LNS iterations.
    seed : int, default=0
        Seed of the run's random generator.
    fixed_k : bool, default=False
        Keep ``k`` at ``k0`` instead of adapting it.

    Examples
    --------
    Desk-scale LB-RELAX on minimum vertex cover

    >>> config = LnsConfig.desk("mvc", "LBRELAX")

    Reproducible run with node-limited repairs

    >>> config = LnsConfig(
    ...     heuristic="RANDOM",
    ...     k0=10,
    ...     repair_budget=SolveBudget(node_limit=500),
    ...     time_limit=None,
    ...     iteration_limit=20,
    ... )
    """

    heuristic: Heuristic = attrs.field(default=Heuristic.RANDOM, converter=_convert_heuristic)
    k0: int = attrs.field(
        default=30,
        validator=attrs.validators.and_(attrs.validators.instance_of(int), attrs.validators.ge(1)),
    )
    alpha: float = attrs.field(
        default=1.02,
        validator=attrs.validators.and_(attrs.validators.instance_of((int, float)), attrs.validators.gt(1)),
    )
    beta: float = attrs.field(
        default=0.5,
        validator=attrs.validators.and_(
            attrs.validators.instance_of((int, float)),
            attrs.validators.gt(0),
            attrs.validators.le(1),
        ),
    )
    gamma: float = attrs.field(
        default=30.0,
        validator=attrs.validators.and_(attrs.validators.instance_of((int, float)), attrs.validators.gt(0)),
    )
    repair_budget: SolveBudget = attrs.field(
        factory=SolveBudget.repair, validator=attrs.validators.instance_of(SolveBudget)
    )
    lb_repair_budget: SolveBudget = attrs.field(
        factory=SolveBudget.local_branching, validator=attrs.validators.instance_of(SolveBudget)
    )
    initial_budget: SolveBudget = attrs.field(
        factory=SolveBudget.initial, validator=attrs.validators.instance_of(SolveBudget)
    )
    time_limit: float | None = attrs.field(
        default=120.0,
        validator=attrs.validators.optional(
            attrs.validators.and_(attrs.validators.instance_of((int, float)), attrs.validators.gt(0))
        ),
    )
    iteration_limit: int | None = attrs.field(
        default=None,
        validator=attrs.validators.optional(
            attrs.validators.and_(attrs.validators.instance_of(int), attrs.validators.ge(1))
        ),
    )
    seed: int = attrs.field(
        default=0,
        validator=attrs.validators.and_(
            attrs.validators.instance_of(int),
            attrs.validators.ge(0),
            attrs.validators.lt(2**64),
        ),
    )
    fixed_k: bool = attrs.field(default=False, validator=attrs.validators.instance_of(bool))

    def __attrs_post_init__(self):
        if self.time_limit is None and self.iteration_limit is None:
            raise ValueError("LnsConfig needs a time_limit or an iteration_limit")

    def evolve(self, **changes: Any) -> LnsConfig:
        """Return a copy with ``changes`` applied."""
        return attrs.evolve(self, **changes)

    def snapshot(self) -> dict[str, Any]:
        """JSON-friendly dictionary of every field."""
        return attrs.asdict(self, value_serializer=_serialize)

    @classmethod
    def from_snapshot(cls, data: dict[str, Any]) -> LnsConfig:
        """Rebuild a config from :meth:`snapshot` output."""
        data = dict(data)
        for key in ("repair_budget", "lb_repair_budget", "initial_budget"):
            if key in data and isinstance(data[key], dict):
                data[key] = SolveBudget(**data[key])
        return cls(**data)

    @classmethod
    def desk(cls, family: str, heuristic: Heuristic | str = Heuristic.LBRELAX, seed: int = 0) -> LnsConfig:
        """Desk-scale protocol: 120 s horizon, 5 s repairs, 25 s Local Branching solves.

        Returns
        -------
        LnsConfig
            Configuration with the family's scaled ``k0``.
        """
        family = _check_family(family)
        return cls(
            heuristic=heuristic,
            k0=K0_PRESETS["desk"][family],
            repair_budget=SolveBudget.repair(),
            lb_repair_budget=SolveBudget.local_branching(),
            initial_budget=SolveBudget.initial(),
            time_limit=120.0,
            seed=seed,
        )

    @classmethod
    def full(cls, family: str, heuristic: Heuristic | str = Heuristic.LBRELAX, seed: int = 0) -> LnsConfig:
        """Full-scale protocol: 60 min horizon, 2 min repairs, 10 min Local Branching solves.

        Returns
        -------
        LnsConfig
            Configuration with the family's full-scale ``k0``.
        """
        family = _check_family(family)
        return cls(
            heuristic=heuristic,
            k0=K0_PRESETS["full"][family],
            repair_budget=SolveBudget(time_limit=120.0),
            lb_repair_budget=SolveBudget(time_limit=600.0),
            initial_budget=SolveBudget(time_limit=20.0 if family == "mk" else 10.0),
            time_limit=3600.0,
            seed=seed,
        )

    @classmethod
    def from_preset(
        cls, preset: str, family: str, heuristic: Heuristic | str = Heuristic.LBRELAX, seed: int = 0
    ) -> LnsConfig:
        """:meth:`desk` or :meth:`full` by name; ``paper-mini`` and ``paper-full`` are accepted too."""
        factory = cls.full if _convert_preset(preset) == "full" else cls.desk
        return factory(family, heuristic=heuristic, seed=seed)
