"""Event ontology model: event types, role types, and permitted entity types.

An ontology document declares the closed inventory of event types, the role
types each event can take, and which entity types may fill each role. It is
loaded once, validated, and treated as immutable afterwards.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# Reserved for the solver's unassigned-argument resolution; never a real role.
RESERVED_NONE_ROLE = "__NONE__"


class OntologyError(Exception):
    """Base class for ontology loading problems."""


class OntologyParseError(OntologyError):
    """The document is not a well-formed ontology file."""


class OntologyValidationError(OntologyError):
    """The document parsed but violates an ontology invariant."""


@dataclass(frozen=True)
class EntityType:
    id: str


@dataclass(frozen=True)
class RoleType:
    id: str
    label: str
    # Empty set means "unconstrained": any entity type (or none) is admissible.
    permitted_entities: frozenset[str] = frozenset()


@dataclass(frozen=True)
class EventType:
    id: str
    label: str
    roles: tuple[str, ...] = ()


@dataclass(frozen=True)
class Ontology:
    """Validated event ontology. Immutable; safe for concurrent reads."""

    event_types: dict[str, EventType] = field(default_factory=dict)
    role_types: dict[str, RoleType] = field(default_factory=dict)
    entity_types: dict[str, EntityType] = field(default_factory=dict)

    def compatible(self, event_id: str, role_id: str) -> bool:
        """True iff ``role_id`` is one of the roles declared for ``event_id``."""
        event = self.event_types.get(event_id)
        if event is None:
            raise KeyError(f"unknown event type: {event_id!r}")
        if role_id not in self.role_types:
            raise KeyError(f"unknown role type: {role_id!r}")
        return role_id in event.roles

    def entity_admissible(self, role_id: str, entity_id: str | None) -> bool:
        """True iff ``entity_id`` may fill ``role_id``.

        A missing entity type is a wildcard and always admissible; a role
        with no declared entity constraint admits every entity type.
        """
        role = self.role_types.get(role_id)
        if role is None:
            raise KeyError(f"unknown role type: {role_id!r}")
        if entity_id is None:
            return True
        if not role.permitted_entities:
            return True
        return entity_id in role.permitted_entities

    def event_ids(self) -> list[str]:
        return sorted(self.event_types)

    def role_ids(self) -> list[str]:
        return sorted(self.role_types)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise OntologyValidationError(message)


def _as_str(value: Any, what: str) -> str:
    if not isinstance(value, str) or not value:
        raise OntologyValidationError(f"{what} must be a non-empty string, got {value!r}")
    return value


def ontology_from_dict(doc: dict[str, Any]) -> Ontology:
    """Build and validate an :class:`Ontology` from a parsed document."""
    if not isinstance(doc, dict):
        raise OntologyParseError("ontology document must be a mapping")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise OntologyParseError(
            f"unsupported ontology schema_version {version!r} (expected {SCHEMA_VERSION})"
        )

    entity_types: dict[str, EntityType] = {}
    for raw in doc.get("entity_types", []):
        eid = _as_str(raw.get("id"), "entity type id")
        _require(eid not in entity_types, f"duplicate entity type id {eid!r}")
        entity_types[eid] = EntityType(id=eid)

    role_types: dict[str, RoleType] = {}
    for raw in doc.get("role_types", []):
        rid = _as_str(raw.get("id"), "role type id")
        _require(rid not in role_types, f"duplicate role type id {rid!r}")
        _require(rid != RESERVED_NONE_ROLE, f"role id {rid!r} is reserved")
        label = _as_str(raw.get("label"), f"label of role {rid!r}")
        permitted = raw.get("permitted_entities", [])
        for ent in permitted:
            _require(
                ent in entity_types,
                f"role {rid!r} permits undeclared entity type {ent!r}",
            )
        role_types[rid] = RoleType(id=rid, label=label, permitted_entities=frozenset(permitted))

    event_types: dict[str, EventType] = {}
    for raw in doc.get("event_types", []):
        eid = _as_str(raw.get("id"), "event type id")
        _require(eid not in event_types, f"duplicate event type id {eid!r}")
        label = _as_str(raw.get("label"), f"label of event {eid!r}")
        roles = raw.get("roles", [])
        seen: set[str] = set()
        for rid in roles:
            _require(rid in role_types, f"event {eid!r} references undeclared role {rid!r}")
            _require(rid not in seen, f"event {eid!r} lists role {rid!r} twice")
            seen.add(rid)
        event_types[eid] = EventType(id=eid, label=label, roles=tuple(roles))

    _require(bool(event_types), "ontology has no event types")

    referenced = {rid for ev in event_types.values() for rid in ev.roles}
    for rid in role_types:
        if rid not in referenced:
            log.warning("role type %r is not referenced by any event type", rid)

    return Ontology(event_types=event_types, role_types=role_types, entity_types=entity_types)


def ontology_to_dict(ontology: Ontology) -> dict[str, Any]:
    """Serialize back to the document schema (inverse of :func:`ontology_from_dict`)."""
    return {
        "schema_version": SCHEMA_VERSION,
        "entity_types": [{"id": e.id} for e in ontology.entity_types.values()],
        "role_types": [
            {"id": r.id, "label": r.label, "permitted_entities": sorted(r.permitted_entities)}
            for r in ontology.role_types.values()
        ],
        "event_types": [
            {"id": ev.id, "label": ev.label, "roles": list(ev.roles)}
            for ev in ontology.event_types.values()
        ],
    }


def load_ontology(path: str | Path) -> Ontology:
    """Load and validate an ontology document from a JSON file."""
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise OntologyParseError(f"cannot read ontology file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise OntologyParseError(f"malformed ontology file {path}: {exc}") from exc
    return ontology_from_dict(doc)


def anchor_label(label: str) -> str:
    """Normalize a type label for anchor-word lookup (labels join lowercased)."""
    return label.lower()
