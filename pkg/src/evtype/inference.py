"""Exact constrained inference over trigger-type and argument-role indicators.

Maximizes the joint objective

    sum_j ( lambda * f(t, E_i) * I_t(i)  +  sum_k f(a_j, R_k) * I_a(j, k) )

subject to:
    C1  exactly one trigger type;
    C2  exactly one role per argument;
    C3  distinct roles across arguments (configurable, default on);
    C4  argument roles must belong to the chosen event type's role set;
    C5  an argument's entity type must be admissible for its role.

Note the outer sum over arguments multiplies the trigger term by m; for
m = 0 the objective degenerates to lambda * f(t, E_i) (pure trigger argmax).

All objective comparisons run in exact rational arithmetic (fractions of the
input float scores), so the solver and the brute-force oracle agree bit-exactly
on optima and on ties. Ties between equal-objective solutions are broken
lexicographically: trigger id first, then role ids in argument order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .mentions import EventMention
from .ontology import Ontology, RESERVED_NONE_ROLE
from .scoring import ScoreMatrix, rank

# Exhaustive-enumeration guard for the testing oracle.
BRUTE_FORCE_LIMIT = 10_000_000

# Bitmask-DP guard; events with more arguments than this are beyond any
# realistic mention input and would exhaust memory.
MAX_ARGUMENTS = 20


class InferenceError(Exception):
    pass


class InfeasibleError(InferenceError):
    """No assignment satisfies C1-C5; names the binding constraint classes."""

    def __init__(self, event_id: str, constraint_classes: tuple[str, ...]):
        self.event_id = event_id
        self.constraint_classes = constraint_classes
        super().__init__(
            f"event {event_id!r}: no feasible assignment "
            f"(binding constraints: {', '.join(constraint_classes)})"
        )


class InstanceTooLargeError(InferenceError):
    pass


@dataclass
class InferenceConfig:
    """Joint-inference knobs; ``lam`` is the trigger weight (lambda)."""

    lam: float = 10.0
    enforce_distinct_roles: bool = True
    allow_unassigned_arguments: bool = False

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")


@dataclass
class TypedEvent:
    """Inference output: one trigger type, one role per argument, rankings."""

    event_id: str
    trigger_type: str
    argument_roles: list[str]
    objective_value: float
    trigger_ranking: list[tuple[str, float]] = field(default_factory=list)
    role_rankings: list[list[tuple[str, float]]] = field(default_factory=list)


def _check_coverage(scores: ScoreMatrix, ontology: Ontology, m: int) -> None:
    missing = [e for e in ontology.event_types if e not in scores.trigger_scores]
    if missing:
        raise ValueError(f"trigger scores missing event types: {missing}")
    if len(scores.argument_scores) != m:
        raise ValueError(
            f"score matrix has {len(scores.argument_scores)} argument rows, event has {m}"
        )
    for j, row in enumerate(scores.argument_scores):
        missing = [r for r in ontology.role_types if r not in row]
        if missing:
            raise ValueError(f"argument {j} scores missing role types: {missing}")


def _objective(lam: Fraction, m: int, ft: Fraction, arg_sum: Fraction) -> Fraction:
    if m == 0:
        return lam * ft
    return m * lam * ft + arg_sum


def _none_penalty(lam: Fraction, m: int) -> Fraction:
    # Must exceed the largest possible objective spread, so that solutions
    # with fewer NONE-assigned arguments always dominate.
    return 4 * Fraction(m) * (lam + 1) + 1


def _post_ilp_ranking(raw: dict[str, float], chosen: str) -> list[tuple[str, float]]:
    # ILP yields one assignment, not a ranking; for Hit@K the chosen label is
    # listed first and the rest follow by raw score.
    full = rank(raw, len(raw)) if raw else []
    chosen_score = 0.0 if chosen == RESERVED_NONE_ROLE else raw[chosen]
    return [(chosen, chosen_score)] + [(lbl, s) for lbl, s in full if lbl != chosen]


def _diagnose(event: EventMention, ontology: Ontology, config: InferenceConfig) -> tuple[str, ...]:
    """Name the constraint classes that make every trigger choice infeasible."""
    reasons: set[str] = set()
    m = event.m
    for eid in sorted(ontology.event_types):
        roles_e = sorted(ontology.event_types[eid].roles)
        if not roles_e:
            reasons.add("C4")
            continue
        if config.enforce_distinct_roles and m > len(roles_e):
            reasons.add("C3")
            continue
        allowed = [
            [r for r in roles_e if ontology.entity_admissible(r, arg.entity_type)]
            for arg in event.arguments
        ]
        if any(not opts for opts in allowed):
            reasons.add("C5")
            continue
        if config.enforce_distinct_roles and not _has_perfect_matching(allowed):
            reasons.add("C3")
    return tuple(sorted(reasons)) if reasons else ("C1",)


def _has_perfect_matching(allowed: list[list[str]]) -> bool:
    # Augmenting-path matching of arguments to roles.
    match: dict[str, int] = {}

    def augment(j: int, seen: set[str]) -> bool:
        for r in allowed[j]:
            if r in seen:
                continue
            seen.add(r)
            if r not in match or augment(match[r], seen):
                match[r] = j
                return True
        return False

    return all(augment(j, set()) for j in range(len(allowed)))


def _finalize(
    event: EventMention,
    scores: ScoreMatrix,
    trigger: str,
    roles: tuple[str, ...],
    objective: Fraction,
) -> TypedEvent:
    return TypedEvent(
        event_id=event.event_id,
        trigger_type=trigger,
        argument_roles=list(roles),
        objective_value=float(objective),
        trigger_ranking=_post_ilp_ranking(scores.trigger_scores, trigger),
        role_rankings=[
            _post_ilp_ranking(scores.argument_scores[j], roles[j]) for j in range(event.m)
        ],
    )


def solve(
    event: EventMention,
    scores: ScoreMatrix,
    ontology: Ontology,
    config: InferenceConfig,
) -> TypedEvent:
    """Global maximizer of the constrained objective.

    Decomposes over candidate trigger types; under distinct-roles the
    argument subproblem is a maximum-weight assignment of arguments to the
    event's admissible roles, solved exactly by a bitmask DP with
    tie-broken (lexicographically minimal) solution extraction.
    """
    m = event.m
    _check_coverage(scores, ontology, m)
    if m > MAX_ARGUMENTS:
        raise InstanceTooLargeError(f"event {event.event_id!r} has {m} arguments (max {MAX_ARGUMENTS})")
    lam = Fraction(config.lam)
    ft = {e: Fraction(scores.trigger_scores[e]) for e in ontology.event_types}

    if m == 0:
        trigger = min(ontology.event_types, key=lambda e: (-ft[e], e))
        return _finalize(event, scores, trigger, (), _objective(lam, 0, ft[trigger], Fraction(0)))

    fa = [
        {r: Fraction(scores.argument_scores[j][r]) for r in ontology.role_types}
        for j in range(m)
    ]
    penalty = _none_penalty(lam, m)
    best: tuple[Fraction, str, tuple[str, ...], Fraction] | None = None  # penalized, trig, roles, true obj

    for eid in sorted(ontology.event_types):
        roles_e = sorted(set(ontology.event_types[eid].roles))
        allowed = [
            frozenset(
                r for r in roles_e if ontology.entity_admissible(r, event.arguments[j].entity_type)
            )
            for j in range(m)
        ]
        result = _best_argument_assignment(roles_e, allowed, fa, config, penalty)
        if result is None:
            continue
        penalized_args, roles, true_args = result
        penalized = m * lam * ft[eid] + penalized_args
        true_obj = _objective(lam, m, ft[eid], true_args)
        # Trigger ids are visited in sorted order, so on equal objectives the
        # earlier (smaller) trigger id is kept; within one trigger the
        # subproblem already returned the lexicographically minimal roles.
        if best is None or penalized > best[0]:
            best = (penalized, eid, roles, true_obj)
    if best is None:
        raise InfeasibleError(event.event_id, _diagnose(event, ontology, config))
    _, trigger, roles, true_obj = best
    return _finalize(event, scores, trigger, roles, true_obj)


def _best_argument_assignment(
    roles_e: list[str],
    allowed: list[frozenset[str]],
    fa: list[dict[str, Fraction]],
    config: InferenceConfig,
    penalty: Fraction,
) -> tuple[Fraction, tuple[str, ...], Fraction] | None:
    """Best (penalized score, role tuple, true score) for one trigger choice.

    Returns None when no feasible assignment exists for this trigger.
    NONE assignments are exempt from the distinct-roles constraint and carry
    score 0 minus the dominance penalty.
    """
    m = len(allowed)
    if not config.enforce_distinct_roles:
        total = Fraction(0)
        roles: list[str] = []
        n_none = 0
        for j in range(m):
            options = sorted(allowed[j])
            if not options:
                if not config.allow_unassigned_arguments:
                    return None
                roles.append(RESERVED_NONE_ROLE)
                n_none += 1
                continue
            pick = min(options, key=lambda r: (-fa[j][r], r))
            roles.append(pick)
            total += fa[j][pick]
        return total - penalty * n_none, tuple(roles), total

    dp = _AssignmentDP(roles_e, allowed, fa)
    full = (1 << m) - 1
    if not config.allow_unassigned_arguments:
        plan = dp.solve(full)
        if plan is None:
            return None
        value, roles = plan
        return value, roles, value

    best: tuple[Fraction, tuple[str, ...], Fraction] | None = None
    for subset in range(full, -1, -1):
        plan = dp.solve(subset)
        if plan is None:
            continue
        value, assigned = plan
        n_none = m - bin(subset).count("1")
        roles = _merge_with_none(m, subset, assigned)
        cand = (value - penalty * n_none, roles, value)
        if best is None or cand[0] > best[0] or (cand[0] == best[0] and cand[1] < best[1]):
            best = cand
    return best


def _merge_with_none(m: int, subset: int, assigned: tuple[str, ...]) -> tuple[str, ...]:
    roles = []
    it = iter(assigned)
    for j in range(m):
        roles.append(next(it) if subset >> j & 1 else RESERVED_NONE_ROLE)
    return tuple(roles)


class _AssignmentDP:
    """Max-weight injective assignment of an argument subset to roles.

    State (q, mask): arguments in ``mask`` still need a role drawn from
    ``roles[q:]``. Each state stores the optimal value plus the
    lexicographically minimal role tuple among optima (tuple ordered by
    argument index), which composes under role insertion.
    """

    def __init__(
        self, roles: list[str], allowed: list[frozenset[str]], fa: list[dict[str, Fraction]]
    ):
        self.roles = roles
        self.allowed = allowed
        self.fa = fa
        self._memo: dict[tuple[int, int], tuple[Fraction, tuple[str, ...]] | None] = {}

    def solve(self, mask: int) -> tuple[Fraction, tuple[str, ...]] | None:
        return self._best(0, mask)

    def _best(self, q: int, mask: int) -> tuple[Fraction, tuple[str, ...]] | None:
        if mask == 0:
            return Fraction(0), ()
        if q == len(self.roles):
            return None
        key = (q, mask)
        if key in self._memo:
            return self._memo[key]
        role = self.roles[q]
        best = self._best(q + 1, mask)  # role q unused
        j = 0
        rest = mask
        while rest:
            if rest & 1 and role in self.allowed[j]:
                sub = self._best(q + 1, mask & ~(1 << j))
                if sub is not None:
                    value = self.fa[j][role] + sub[0]
                    pos = bin(mask & ((1 << j) - 1)).count("1")
                    roles = sub[1][:pos] + (role,) + sub[1][pos:]
                    if best is None or value > best[0] or (value == best[0] and roles < best[1]):
                        best = (value, roles)
            rest >>= 1
            j += 1
        self._memo[key] = best
        return best


def brute_force_solve(
    event: EventMention,
    scores: ScoreMatrix,
    ontology: Ontology,
    config: InferenceConfig,
) -> TypedEvent:
    """Testing oracle: exhaustive enumeration with identical tie-breaking."""
    m = event.m
    _check_coverage(scores, ontology, m)
    domain = sorted(ontology.role_types)
    if config.allow_unassigned_arguments:
        domain = sorted(domain + [RESERVED_NONE_ROLE])
    size = len(ontology.event_types) * (len(domain) ** m if m else 1)
    if size > BRUTE_FORCE_LIMIT:
        raise InstanceTooLargeError(f"instance too large for enumeration ({size} assignments)")

    lam = Fraction(config.lam)
    penalty = _none_penalty(lam, m)
    fa = [
        {r: Fraction(scores.argument_scores[j][r]) for r in ontology.role_types}
        for j in range(m)
    ]
    best: tuple[Fraction, str, tuple[str, ...], Fraction] | None = None
    for eid in sorted(ontology.event_types):
        ft = Fraction(scores.trigger_scores[eid])
        event_roles = set(ontology.event_types[eid].roles)
        for roles in itertools.product(domain, repeat=m):
            real = [r for r in roles if r != RESERVED_NONE_ROLE]
            if any(r not in event_roles for r in real):
                continue  # C4
            if config.enforce_distinct_roles and len(set(real)) != len(real):
                continue  # C3
            ok = all(
                roles[j] == RESERVED_NONE_ROLE
                or ontology.entity_admissible(roles[j], event.arguments[j].entity_type)
                for j in range(m)
            )
            if not ok:
                continue  # C5
            arg_sum = Fraction(0)
            n_none = 0
            for j in range(m):
                if roles[j] == RESERVED_NONE_ROLE:
                    n_none += 1
                else:
                    arg_sum += fa[j][roles[j]]
            true_obj = _objective(lam, m, ft, arg_sum)
            penalized = true_obj - penalty * n_none
            # Enumeration order is lexicographic, so strict improvement keeps
            # the lexicographically smallest optimum.
            if best is None or penalized > best[0]:
                best = (penalized, eid, roles, true_obj)
    if best is None:
        raise InfeasibleError(event.event_id, _diagnose(event, ontology, config))
    _, trigger, roles, true_obj = best
    return _finalize(event, scores, trigger, roles, true_obj)
