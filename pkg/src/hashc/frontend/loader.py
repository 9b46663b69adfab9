"""Source loading and use-resolution.

A program is assembled from providers searched in order: explicit in-memory
bundles (service uploads), directories next to the entry file, then the
bundled library. A dotted use path `A.B.C` resolves to `A/B/C.hcl` holding a
component named C, or to `A/B.hcl` when C is one of several components in a
shared file.

Kernel descriptors live in `X.kernel.json` beside `X.hcl` and are attached to
every component of that file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from hashc.errors import CyclicUse, DuplicateKernel, ParseError, UnresolvedComponent
from hashc.frontend.ast_nodes import ConfigAst, UseDecl
from hashc.frontend.lexer import lex
from hashc.frontend.parser import parse_file
from hashc.frontend.preprocess import expand_macros


class SourceBundle:
    """In-memory provider: normalized relative posix paths to file text."""

    def __init__(self, files: dict[str, str], label: str = "<memory>"):
        self.files = {k.lstrip("./"): v for k, v in files.items()}
        self.label = label

    def get(self, rel: str) -> str | None:
        return self.files.get(rel)


class DirSource:
    """Disk provider rooted at a directory (or importlib Traversable)."""

    def __init__(self, root, label: str | None = None):
        self.root = root
        self.label = label or str(root)

    def get(self, rel: str) -> str | None:
        node = self.root
        for part in rel.split("/"):
            node = node / part
        try:
            if not node.is_file():
                return None
            return node.read_text()
        except (FileNotFoundError, NotADirectoryError, OSError):
            return None


def builtin_library() -> DirSource:
    return DirSource(resources.files("hashc") / "corpus" / "library", label="<library>")


@dataclass
class FileUnit:
    path: str
    configs: list[ConfigAst]
    kernels: list[dict]
    provider: str


@dataclass
class LoadedComponent:
    name: str
    ast: ConfigAst
    path: str
    kernels: list[dict] = field(default_factory=list)


@dataclass
class Program:
    entry: str
    components: dict[str, LoadedComponent]
    order: list[str]
    kernels: dict[str, dict]

    @property
    def entry_component(self) -> LoadedComponent:
        return self.components[self.entry]


class Loader:
    def __init__(self, providers: list | None = None, include_library: bool = True):
        self.providers = list(providers or [])
        if include_library:
            self.providers.append(builtin_library())
        self._files: dict[str, FileUnit] = {}

    # file level

    def read(self, rel: str) -> tuple[str, str] | None:
        for provider in self.providers:
            text = provider.get(rel)
            if text is not None:
                return text, provider.label
        return None

    def load_file(self, rel: str) -> FileUnit:
        if rel in self._files:
            return self._files[rel]
        found = self.read(rel)
        if found is None:
            raise UnresolvedComponent(f"no source file {rel!r} on the search path")
        text, label = found
        try:
            configs = parse_file(expand_macros(text))
        except ParseError as exc:
            raise ParseError(f"{rel}: {exc.message}", line=exc.line, col=exc.col) from exc
        kernels = self._load_kernels(rel)
        unit = FileUnit(path=rel, configs=configs, kernels=kernels, provider=label)
        self._files[rel] = unit
        return unit

    def _load_kernels(self, rel: str) -> list[dict]:
        stem = rel[:-4] if rel.endswith(".hcl") else rel
        found = self.read(stem + ".kernel.json")
        if found is None:
            return []
        doc = json.loads(found[0])
        kernels = doc.get("kernels", [])
        seen = set()
        for k in kernels:
            if k["name"] in seen:
                raise DuplicateKernel(f"kernel {k['name']!r} declared twice in {stem}.kernel.json")
            seen.add(k["name"])
        return kernels

    # component level

    def resolve_use(self, path: tuple[str, ...]) -> tuple[str, str]:
        """Map a dotted use path to (file, component name)."""
        comp = path[-1]
        direct = "/".join(path) + ".hcl"
        if self.read(direct) is not None:
            return direct, comp
        if len(path) > 1:
            shared = "/".join(path[:-1]) + ".hcl"
            if self.read(shared) is not None:
                return shared, comp
        raise UnresolvedComponent(f"cannot resolve use {'.'.join(path)!r} on the search path")

    def load_program(self, entry_rel: str, entry_component: str | None = None) -> Program:
        components: dict[str, LoadedComponent] = {}
        kernels: dict[str, dict] = {}
        order: list[str] = []
        loading: list[str] = []

        def register_file(unit: FileUnit) -> None:
            for cfg in unit.configs:
                if cfg.name not in components:
                    components[cfg.name] = LoadedComponent(
                        name=cfg.name, ast=cfg, path=unit.path, kernels=unit.kernels
                    )
            for k in unit.kernels:
                prev = kernels.get(k["name"])
                if prev is not None and prev is not k:
                    raise DuplicateKernel(f"kernel {k['name']!r} declared in two files")
                kernels[k["name"]] = k

        def visit(name: str) -> None:
            if name in order:
                return
            if name in loading:
                cycle = " -> ".join((*loading[loading.index(name) :], name))
                raise CyclicUse(f"use cycle: {cycle}")
            loading.append(name)
            comp = components[name]
            for decl in comp.ast.decls:
                if isinstance(decl, UseDecl):
                    dep_file, dep_name = self.resolve_use(decl.path)
                    register_file(self.load_file(dep_file))
                    if dep_name not in components:
                        raise UnresolvedComponent(
                            f"{dep_file} does not define component {dep_name!r}"
                        )
                    visit(dep_name)
            loading.pop()
            order.append(name)

        entry_unit = self.load_file(entry_rel)
        if not entry_unit.configs:
            raise ParseError(f"{entry_rel}: no configurations found")
        register_file(entry_unit)
        entry = entry_component or entry_unit.configs[-1].name
        if entry not in components:
            raise UnresolvedComponent(f"{entry_rel} does not define component {entry!r}")
        for cfg in entry_unit.configs:
            visit(cfg.name)
        return Program(entry=entry, components=components, order=order, kernels=kernels)


def resolve_uses(
    sources: dict[str, str],
    entry: str,
    entry_component: str | None = None,
    include_library: bool = True,
) -> Program:
    """Assemble a program from in-memory sources plus the bundled library."""
    loader = Loader([SourceBundle(sources)], include_library=include_library)
    return loader.load_program(entry, entry_component)


def load_path(path: str | Path, entry_component: str | None = None) -> Program:
    """Assemble a program from a file on disk; siblings resolve relative to it."""
    p = Path(path).resolve()
    loader = Loader([DirSource(p.parent, label=str(p.parent))])
    return loader.load_program(p.name, entry_component)
