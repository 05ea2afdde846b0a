"""Service registry: data formats, resource/service taxonomies, concrete services.

The registry is the single source of truth for everything the planner and the
similarity machinery need: which service classes exist, how they nest, what
typed ports they expose, and which concrete services implement them with which
data formats and QoS figures.  A registry is immutable after load and safe to
share across threads.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from typing import BinaryIO, Iterable, Mapping

import jsonschema


class RegistryError(Exception):
    """Base class for registry load/lookup failures."""


class RegistryParseError(RegistryError):
    """The registry document is not well-formed."""


class RegistryIntegrityError(RegistryError):
    """The document parsed but violates referential integrity."""


class UnknownClassError(RegistryError):
    """A taxonomy query referenced a class that does not exist."""


@dataclass(frozen=True)
class QoSVector:
    """Quality-of-service quadruple for one service (or an aggregate).

    rt: response time in seconds, >= 0
    tp: successful responses per measurement period, >= 0
    av: availability, probability in [0, 1]
    re: reliability, mean seconds between failures, >= 0
    """

    rt: float
    tp: float
    av: float
    re: float

    def __post_init__(self):
        for name in ("rt", "tp", "av", "re"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or v != v or v in (float("inf"), float("-inf")):
                raise ValueError(f"QoS field {name} must be finite, got {v!r}")
            if v < 0:
                raise ValueError(f"QoS field {name} must be >= 0, got {v!r}")
        if self.av > 1:
            raise ValueError(f"availability must be in [0, 1], got {self.av!r}")

    def to_dict(self) -> dict:
        return {"rt": self.rt, "tp": self.tp, "av": self.av, "re": self.re}


@dataclass(frozen=True)
class ServiceClass:
    name: str
    parent: str | None
    inputs: tuple[tuple[str, str], ...]   # (port, resource class)
    outputs: tuple[tuple[str, str], ...]  # (port, resource class)
    description: str = ""

    @property
    def input_ports(self) -> dict[str, str]:
        return dict(self.inputs)

    @property
    def output_ports(self) -> dict[str, str]:
        return dict(self.outputs)


@dataclass(frozen=True)
class ConcreteService:
    name: str
    service_class: str
    input_formats: Mapping[str, str]
    output_formats: Mapping[str, str]
    qos: QoSVector
    description: str = ""


class Taxonomy:
    """A forest of named classes with parent links.

    Used twice: once for resource classes, once for service classes (the same
    subclass mechanism backs both, so one implementation serves both sides).
    """

    def __init__(self, parents: Mapping[str, str | None]):
        self._parents = dict(parents)
        for name, parent in self._parents.items():
            if parent is not None and parent not in self._parents:
                raise RegistryIntegrityError(
                    f"class {name!r} references unknown parent {parent!r}")
        # cycle check + depth computation in one pass
        self._depth: dict[str, int] = {}
        for name in self._parents:
            seen = []
            cur = name
            while cur is not None and cur not in self._depth:
                if cur in seen:
                    raise RegistryIntegrityError(f"cycle in taxonomy through {cur!r}")
                seen.append(cur)
                cur = self._parents[cur]
            base = 0 if cur is None else self._depth[cur] + 1
            for i, n in enumerate(reversed(seen)):
                self._depth[n] = base + i
        self._children: dict[str, list[str]] = {n: [] for n in self._parents}
        for name, parent in self._parents.items():
            if parent is not None:
                self._children[parent].append(name)
        for kids in self._children.values():
            kids.sort()

    def __contains__(self, name: str) -> bool:
        return name in self._parents

    def __iter__(self):
        return iter(sorted(self._parents))

    def _check(self, name: str):
        if name not in self._parents:
            raise UnknownClassError(f"unknown class {name!r}")

    def parent(self, name: str) -> str | None:
        self._check(name)
        return self._parents[name]

    def children(self, name: str) -> list[str]:
        self._check(name)
        return list(self._children[name])

    def roots(self) -> list[str]:
        return sorted(n for n, p in self._parents.items() if p is None)

    def depth(self, name: str) -> int:
        self._check(name)
        return self._depth[name]

    def ancestors(self, name: str) -> list[str]:
        """Chain from name up to its root, inclusive of name."""
        self._check(name)
        chain = []
        cur: str | None = name
        while cur is not None:
            chain.append(cur)
            cur = self._parents[cur]
        return chain

    def is_subclass(self, a: str, b: str) -> bool:
        """True iff a == b or a is a transitive descendant of b."""
        self._check(a)
        self._check(b)
        cur: str | None = a
        while cur is not None:
            if cur == b:
                return True
            cur = self._parents[cur]
        return False

    def lca(self, a: str, b: str) -> str | None:
        """Deepest common ancestor-or-self; None when a and b lie in
        different trees of the forest."""
        anc_a = self.ancestors(a)
        anc_b = set(self.ancestors(b))
        for node in anc_a:
            if node in anc_b:
                return node
        return None

    def path_len(self, a: str, b: str) -> int:
        """Number of parent edges from a up to its ancestor b."""
        self._check(a)
        self._check(b)
        steps = 0
        cur: str | None = a
        while cur is not None:
            if cur == b:
                return steps
            cur = self._parents[cur]
            steps += 1
        raise RegistryError(f"{b!r} is not an ancestor of {a!r}")

    def onto_distance(self, a: str, b: str) -> int | None:
        """path_len(a, lca) + path_len(b, lca); None across disjoint roots."""
        anc = self.lca(a, b)
        if anc is None:
            return None
        return self.path_len(a, anc) + self.path_len(b, anc)


def _load_schema() -> dict:
    with importlib_resources.files("wfengine").joinpath("schema/registry.schema.json").open("rb") as f:
        return json.load(f)


_SCHEMA = None


class Registry:
    """Indexed, immutable view over the four registry collections."""

    def __init__(self,
                 data_formats: Iterable[str],
                 resource_classes: Mapping[str, str | None],
                 service_classes: Iterable[ServiceClass],
                 concrete_services: Iterable[ConcreteService]):
        fmt_list = list(data_formats)
        fmt_set = set(fmt_list)
        if len(fmt_set) != len(fmt_list):
            raise RegistryIntegrityError("duplicate data format name")
        self.data_formats = tuple(sorted(fmt_set))
        for fmt in fmt_set:
            if not fmt:
                raise RegistryIntegrityError("empty data format name")

        self.resources = Taxonomy(resource_classes)
        self.service_classes: dict[str, ServiceClass] = {}
        for sc in service_classes:
            if sc.name in self.service_classes:
                raise RegistryIntegrityError(f"duplicate service class {sc.name!r}")
            self.service_classes[sc.name] = sc
        self.services_taxonomy = Taxonomy(
            {sc.name: sc.parent for sc in self.service_classes.values()})

        for sc in self.service_classes.values():
            ports = [p for p, _ in sc.inputs] + [p for p, _ in sc.outputs]
            if len(ports) != len(set(ports)):
                raise RegistryIntegrityError(f"duplicate port name in class {sc.name!r}")
            for _, rc in list(sc.inputs) + list(sc.outputs):
                if rc not in self.resources:
                    raise RegistryIntegrityError(
                        f"class {sc.name!r} references unknown resource class {rc!r}")

        self.concrete_services: dict[str, ConcreteService] = {}
        for svc in concrete_services:
            if svc.name in self.concrete_services:
                raise RegistryIntegrityError(f"duplicate service {svc.name!r}")
            if svc.service_class not in self.service_classes:
                raise RegistryIntegrityError(
                    f"service {svc.name!r} references unknown class {svc.service_class!r}")
            sc = self.service_classes[svc.service_class]
            if set(svc.input_formats) != set(sc.input_ports):
                raise RegistryIntegrityError(
                    f"service {svc.name!r} input formats do not cover ports of {sc.name!r}")
            if set(svc.output_formats) != set(sc.output_ports):
                raise RegistryIntegrityError(
                    f"service {svc.name!r} output formats do not cover ports of {sc.name!r}")
            for fmt in list(svc.input_formats.values()) + list(svc.output_formats.values()):
                if fmt not in fmt_set:
                    raise RegistryIntegrityError(
                        f"service {svc.name!r} uses unknown format {fmt!r}")
            self.concrete_services[svc.name] = svc

        if not self.resources.roots():
            raise RegistryIntegrityError("no taxonomy root among resource classes")
        if not self.services_taxonomy.roots():
            raise RegistryIntegrityError("no taxonomy root among service classes")

        self.concrete_by_class: dict[str, list[str]] = {n: [] for n in self.service_classes}
        for svc in self.concrete_services.values():
            self.concrete_by_class[svc.service_class].append(svc.name)
        for names in self.concrete_by_class.values():
            names.sort()

    # -- queries ----------------------------------------------------------

    def service(self, name: str) -> ConcreteService:
        try:
            return self.concrete_services[name]
        except KeyError:
            raise UnknownClassError(f"unknown service {name!r}") from None

    def service_class_of(self, service_name: str) -> ServiceClass:
        return self.service_classes[self.service(service_name).service_class]

    def descriptions_corpus(self) -> list[str]:
        """Descriptions of every concrete service, canonical (name) order."""
        return [self.concrete_services[n].description
                for n in sorted(self.concrete_services)]

    def has_name(self, name: str) -> bool:
        """True for any service or class name (used by refinement targets)."""
        return (name in self.concrete_services
                or name in self.service_classes)

    # -- (de)serialization ------------------------------------------------

    @classmethod
    def from_dict(cls, doc: dict) -> "Registry":
        global _SCHEMA
        if _SCHEMA is None:
            _SCHEMA = _load_schema()
        try:
            jsonschema.validate(doc, _SCHEMA)
        except jsonschema.ValidationError as e:
            raise RegistryParseError(f"registry document invalid: {e.message}") from e

        classes = [
            ServiceClass(
                name=c["name"],
                parent=c.get("parent"),
                inputs=tuple((p["port"], p["class"]) for p in c.get("inputs", [])),
                outputs=tuple((p["port"], p["class"]) for p in c.get("outputs", [])),
                description=c.get("description", ""),
            )
            for c in doc["service_classes"]
        ]
        services = []
        for s in doc["services"]:
            q = s["qos"]
            try:
                qos = QoSVector(rt=q["rt"], tp=q["tp"], av=q["av"], re=q["re"])
            except ValueError as e:
                raise RegistryIntegrityError(f"service {s['name']!r}: {e}") from e
            services.append(ConcreteService(
                name=s["name"],
                service_class=s["class"],
                input_formats=dict(s.get("input_formats", {})),
                output_formats=dict(s.get("output_formats", {})),
                qos=qos,
                description=s.get("description", ""),
            ))
        rc_names = [r["name"] for r in doc["resource_classes"]]
        if len(rc_names) != len(set(rc_names)):
            raise RegistryIntegrityError("duplicate resource class name")
        return cls(
            data_formats=[f["name"] for f in doc["formats"]],
            resource_classes={r["name"]: r.get("parent") for r in doc["resource_classes"]},
            service_classes=classes,
            concrete_services=services,
        )

    def to_dict(self) -> dict:
        return {
            "formats": [{"name": f} for f in self.data_formats],
            "resource_classes": [
                {"name": n, "parent": self.resources.parent(n)}
                for n in self.resources
            ],
            "service_classes": [
                {
                    "name": sc.name,
                    "parent": sc.parent,
                    "inputs": [{"port": p, "class": c} for p, c in sc.inputs],
                    "outputs": [{"port": p, "class": c} for p, c in sc.outputs],
                    "description": sc.description,
                }
                for sc in (self.service_classes[n] for n in sorted(self.service_classes))
            ],
            "services": [
                {
                    "name": s.name,
                    "class": s.service_class,
                    "input_formats": dict(sorted(s.input_formats.items())),
                    "output_formats": dict(sorted(s.output_formats.items())),
                    "qos": s.qos.to_dict(),
                    "description": s.description,
                }
                for s in (self.concrete_services[n] for n in sorted(self.concrete_services))
            ],
        }


def load_registry(source: BinaryIO | bytes | str) -> Registry:
    """Parse and fully index a registry document.

    Raises RegistryParseError for malformed documents and
    RegistryIntegrityError naming the offending entity otherwise.
    """
    if hasattr(source, "read"):
        raw = source.read()
    else:
        raw = source
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError, TypeError) as e:
        raise RegistryParseError(f"cannot parse registry document: {e}") from e
    if not isinstance(doc, dict):
        raise RegistryParseError("registry document must be an object")
    return Registry.from_dict(doc)


def dump_registry(registry: Registry) -> str:
    return json.dumps(registry.to_dict(), indent=2) + "\n"
