"""Shared builders and independent checkers used across the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np

from evtype.inference import InferenceConfig, TypedEvent
from evtype.mentions import ArgumentMention, EventMention, Span
from evtype.ontology import Ontology, RESERVED_NONE_ROLE, ontology_from_dict
from evtype.scoring import ScoreMatrix

DUMMY_VEC = np.array([1.0, 0.0], dtype=np.float32)


def quick_ontology(
    events: dict[str, tuple[str, ...]],
    roles: dict[str, tuple[str, ...]] | None = None,
    entities: tuple[str, ...] = (),
) -> Ontology:
    """Ontology from shorthand: events -> role ids, roles -> permitted entities."""
    role_ids = sorted({r for rs in events.values() for r in rs} | set(roles or {}))
    roles = roles or {}
    return ontology_from_dict(
        {
            "schema_version": 1,
            "entity_types": [{"id": e} for e in entities],
            "role_types": [
                {
                    "id": r,
                    "label": r.lower(),
                    "permitted_entities": list(roles.get(r, ())),
                }
                for r in role_ids
            ],
            "event_types": [
                {"id": e, "label": e.lower(), "roles": list(rs)} for e, rs in events.items()
            ],
        }
    )


def make_event(
    event_id: str = "ev1",
    m: int = 0,
    entity_types: list[str | None] | None = None,
    gold_type: str | None = None,
    gold_roles: list[str | None] | None = None,
) -> EventMention:
    """Event with placeholder spans/embeddings for score-driven tests."""
    entity_types = entity_types if entity_types is not None else [None] * m
    gold_roles = gold_roles if gold_roles is not None else [None] * m
    arguments = [
        ArgumentMention(
            span=Span(sentence_id="s1", start=2 + 2 * j, end=3 + 2 * j, text=f"arg{j}"),
            embedding=DUMMY_VEC,
            entity_type=entity_types[j],
            gold_role=gold_roles[j],
        )
        for j in range(m)
    ]
    return EventMention(
        event_id=event_id,
        trigger=Span(sentence_id="s1", start=0, end=1, text="trig"),
        trigger_embedding=DUMMY_VEC,
        arguments=arguments,
        gold_type=gold_type,
    )


def random_instance(
    rng: random.Random,
    *,
    max_events: int = 5,
    max_roles: int = 6,
    max_args: int = 3,
    quantize: bool = False,
) -> tuple[Ontology, EventMention, ScoreMatrix]:
    """Random ontology, event, and scores in [-1, 1] for solver fuzzing."""
    n_events = rng.randint(1, max_events)
    n_roles = rng.randint(1, max_roles)
    n_entities = rng.randint(1, 4)
    entity_ids = [f"T{i}" for i in range(n_entities)]
    role_ids = [f"R{i}" for i in range(n_roles)]

    roles: dict[str, tuple[str, ...]] = {}
    for rid in role_ids:
        # Half the roles are unconstrained; the rest permit a random subset.
        if rng.random() < 0.5:
            roles[rid] = ()
        else:
            roles[rid] = tuple(rng.sample(entity_ids, rng.randint(1, n_entities)))

    events: dict[str, tuple[str, ...]] = {}
    for i in range(n_events):
        events[f"E{i}"] = tuple(rng.sample(role_ids, rng.randint(1, n_roles)))

    ontology = quick_ontology(events, roles, tuple(entity_ids))

    m = rng.randint(0, max_args)
    entity_types = [rng.choice(entity_ids + [None]) for _ in range(m)]
    event = make_event(event_id="fuzz", m=m, entity_types=entity_types)

    def draw() -> float:
        if quantize:
            return rng.randrange(-100, 101) / 100.0
        return rng.uniform(-1.0, 1.0)

    scores = ScoreMatrix(
        trigger_scores={e: draw() for e in events},
        argument_scores=[{r: draw() for r in role_ids} for _ in range(m)],
    )
    return ontology, event, scores


def check_typed_event(
    typed: TypedEvent,
    event: EventMention,
    scores: ScoreMatrix,
    ontology: Ontology,
    config: InferenceConfig,
) -> list[str]:
    """Independent C1-C5 and objective checks; returns violation messages.

    Written directly from the constraint definitions, sharing no code with
    the solver.
    """
    violations: list[str] = []
    if typed.trigger_type not in ontology.event_types:
        violations.append(f"C1: trigger type {typed.trigger_type!r} not in ontology")
        return violations
    if len(typed.argument_roles) != event.m:
        violations.append(
            f"C2: {len(typed.argument_roles)} roles assigned for {event.m} arguments"
        )
        return violations
    event_roles = set(ontology.event_types[typed.trigger_type].roles)
    real = [r for r in typed.argument_roles if r != RESERVED_NONE_ROLE]
    if any(r == RESERVED_NONE_ROLE for r in typed.argument_roles):
        if not config.allow_unassigned_arguments:
            violations.append("C2: NONE role assigned without allow_unassigned_arguments")
    for j, role in enumerate(typed.argument_roles):
        if role == RESERVED_NONE_ROLE:
            continue
        if role not in ontology.role_types:
            violations.append(f"C2: argument {j} has unknown role {role!r}")
            continue
        if role not in event_roles:
            violations.append(f"C4: role {role!r} not in roles of {typed.trigger_type!r}")
        if not ontology.entity_admissible(role, event.arguments[j].entity_type):
            violations.append(
                f"C5: entity {event.arguments[j].entity_type!r} inadmissible for {role!r}"
            )
    if config.enforce_distinct_roles and len(set(real)) != len(real):
        violations.append(f"C3: repeated roles in {typed.argument_roles}")

    lam = Fraction(config.lam)
    ft = Fraction(scores.trigger_scores[typed.trigger_type])
    if event.m == 0:
        expected = lam * ft
    else:
        arg_sum = sum(
            (
                Fraction(scores.argument_scores[j][r])
                for j, r in enumerate(typed.argument_roles)
                if r != RESERVED_NONE_ROLE
            ),
            Fraction(0),
        )
        expected = event.m * lam * ft + arg_sum
    if abs(typed.objective_value - float(expected)) > 1e-9:
        violations.append(
            f"objective {typed.objective_value} != recomputed {float(expected)}"
        )
    return violations
