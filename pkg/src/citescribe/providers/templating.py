"""Minimal prompt-template renderer.

Supports exactly three constructs: ``{{ var }}`` substitution (with dotted
paths), ``{% for x in seq %}...{% endfor %}``, and
``{% if cond %}...{% endif %}``. Anything else is a template error. Rendering
is plain textual substitution; surrounding whitespace is preserved verbatim so
rendered prompts are byte-stable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

TEMPLATE_NAMES = (
    "cite_fabricate",
    "cite_score",
    "intro_novelty",
    "intro_summarize",
    "intro_compose",
    "eval_claims",
    "eval_entailment",
)

_TAG_RE = re.compile(r"({{.*?}}|{%.*?%})", re.DOTALL)
_FOR_RE = re.compile(r"^\{%\s*for\s+([A-Za-z_][A-Za-z0-9_]*)\s+in\s+(.+?)\s*%\}$", re.DOTALL)
_IF_RE = re.compile(r"^\{%\s*if\s+(.+?)\s*%\}$", re.DOTALL)
_END_RE = re.compile(r"^\{%\s*(endfor|endif)\s*%\}$")
_VAR_RE = re.compile(r"^\{\{\s*(.+?)\s*\}\}$", re.DOTALL)
_PATH_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z0-9_]+)*$")


class TemplateError(ValueError):
    """Raised for unsupported syntax or unresolvable placeholders."""


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str

    def render(self, variables: Mapping[str, Any]) -> str:
        return render(self, variables)


def _resolve(path: str, scopes: list[Mapping[str, Any]], template: str) -> Any:
    if not _PATH_RE.match(path):
        raise TemplateError(f"template {template!r}: unsupported expression {path!r}")
    head, *rest = path.split(".")
    for scope in reversed(scopes):
        if head in scope:
            value = scope[head]
            break
    else:
        raise TemplateError(f"template {template!r}: missing variable {head!r}")
    for segment in rest:
        if isinstance(value, Mapping) and segment in value:
            value = value[segment]
        elif segment.isdigit() and isinstance(value, (list, tuple)):
            value = value[int(segment)]
        elif hasattr(value, segment):
            value = getattr(value, segment)
        else:
            raise TemplateError(f"template {template!r}: cannot resolve {path!r} at {segment!r}")
    return value


class _Node:
    def render(self, scopes: list[Mapping[str, Any]], out: list[str]) -> None:
        raise NotImplementedError


class _Literal(_Node):
    def __init__(self, text: str):
        self.text = text

    def render(self, scopes, out):
        out.append(self.text)


class _Var(_Node):
    def __init__(self, path: str, template: str):
        self.path = path
        self.template = template

    def render(self, scopes, out):
        value = _resolve(self.path, scopes, self.template)
        out.append("" if value is None else str(value))


class _For(_Node):
    def __init__(self, var: str, path: str, children: list[_Node], template: str):
        self.var = var
        self.path = path
        self.children = children
        self.template = template

    def render(self, scopes, out):
        seq = _resolve(self.path, scopes, self.template)
        if seq is None:
            seq = ()
        if not isinstance(seq, Iterable) or isinstance(seq, (str, bytes)):
            raise TemplateError(
                f"template {self.template!r}: {self.path!r} is not iterable in a for block"
            )
        for item in seq:
            scopes.append({self.var: item})
            for child in self.children:
                child.render(scopes, out)
            scopes.pop()


class _If(_Node):
    def __init__(self, path: str, children: list[_Node], template: str):
        self.path = path
        self.children = children
        self.template = template

    def render(self, scopes, out):
        if _resolve(self.path, scopes, self.template):
            for child in self.children:
                child.render(scopes, out)


def _parse(name: str, body: str) -> list[_Node]:
    tokens = _TAG_RE.split(body)
    root: list[_Node] = []
    stack: list[tuple[str, _Node]] = []

    def current() -> list[_Node]:
        if stack:
            node = stack[-1][1]
            return node.children  # type: ignore[union-attr]
        return root

    for token in tokens:
        if not token:
            continue
        if token.startswith("{{"):
            m = _VAR_RE.match(token)
            if not m:
                raise TemplateError(f"template {name!r}: malformed placeholder {token!r}")
            current().append(_Var(m.group(1), name))
        elif token.startswith("{%"):
            if m := _FOR_RE.match(token):
                node = _For(m.group(1), m.group(2), [], name)
                current().append(node)
                stack.append(("endfor", node))
            elif m := _IF_RE.match(token):
                node = _If(m.group(1), [], name)
                current().append(node)
                stack.append(("endif", node))
            elif m := _END_RE.match(token):
                if not stack or stack[-1][0] != m.group(1):
                    raise TemplateError(f"template {name!r}: unexpected {token!r}")
                stack.pop()
            else:
                raise TemplateError(f"template {name!r}: unsupported tag {token!r}")
        else:
            current().append(_Literal(token))
    if stack:
        raise TemplateError(f"template {name!r}: unclosed {stack[-1][0][3:]} block")
    return root


def render(template: PromptTemplate, variables: Mapping[str, Any]) -> str:
    nodes = _parse(template.name, template.body)
    out: list[str] = []
    scopes: list[Mapping[str, Any]] = [variables]
    for node in nodes:
        node.render(scopes, out)
    return "".join(out)


def default_template_dir() -> Path:
    return Path(__file__).parent / "templates"


def load_templates(directory: str | Path | None = None) -> dict[str, PromptTemplate]:
    """Load the named prompt templates from a directory (one ``<name>.txt`` each)."""
    base = Path(directory) if directory is not None else default_template_dir()
    templates: dict[str, PromptTemplate] = {}
    for name in TEMPLATE_NAMES:
        path = base / f"{name}.txt"
        if not path.is_file():
            raise TemplateError(f"template file not found: {path}")
        templates[name] = PromptTemplate(name=name, body=path.read_text(encoding="utf-8"))
    return templates
