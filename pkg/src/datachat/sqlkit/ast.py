"""AST node types for the SELECT-only SQL subset."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


@dataclass
class Node:
    def children(self) -> list["Node"]:
        out: list[Node] = []
        for value in self.__dict__.values():
            if isinstance(value, Node):
                out.append(value)
            elif isinstance(value, (list, tuple)):
                out.extend(v for v in value if isinstance(v, Node))
        return out


def walk(node: Node) -> Iterator[Node]:
    yield node
    for child in node.children():
        yield from walk(child)


# --- expressions -------------------------------------------------------------

@dataclass
class Literal(Node):
    value: object
    kind: str  # number | string | null | bool | param


@dataclass
class ColumnRef(Node):
    table: Optional[str]
    name: str


@dataclass
class Star(Node):
    table: Optional[str] = None


@dataclass
class FuncCall(Node):
    name: str
    args: list[Node] = field(default_factory=list)
    distinct: bool = False
    star: bool = False


@dataclass
class Unary(Node):
    op: str
    operand: Node


@dataclass
class Binary(Node):
    op: str
    left: Node
    right: Node


@dataclass
class InList(Node):
    expr: Node
    items: list[Node]
    negated: bool = False


@dataclass
class InSubquery(Node):
    expr: Node
    select: "Select"
    negated: bool = False


@dataclass
class Between(Node):
    expr: Node
    low: Node
    high: Node
    negated: bool = False


@dataclass
class Case(Node):
    operand: Optional[Node]
    whens: list[tuple[Node, Node]]
    else_: Optional[Node]

    def children(self) -> list[Node]:
        out: list[Node] = []
        if self.operand is not None:
            out.append(self.operand)
        for cond, result in self.whens:
            out.extend((cond, result))
        if self.else_ is not None:
            out.append(self.else_)
        return out


@dataclass
class Cast(Node):
    expr: Node
    type_name: str


@dataclass
class ScalarSubquery(Node):
    select: "Select"


@dataclass
class Exists(Node):
    select: "Select"
    negated: bool = False


# --- select structure ---------------------------------------------------------

@dataclass
class SelectItem(Node):
    expr: Node
    alias: Optional[str] = None


@dataclass
class TableSource(Node):
    name: Optional[str] = None          # set for plain table references
    alias: Optional[str] = None
    subquery: Optional["Select"] = None  # set for (SELECT ...) sources


@dataclass
class Join(Node):
    join_type: str                      # inner | left | right | full | cross
    source: TableSource
    on: Optional[Node] = None
    using: list[str] = field(default_factory=list)


@dataclass
class FromChain(Node):
    first: TableSource
    joins: list[Join] = field(default_factory=list)


@dataclass
class OrderTerm(Node):
    expr: Node
    direction: Optional[str] = None     # asc | desc


@dataclass
class Cte(Node):
    name: str
    columns: list[str]
    select: "Select"


@dataclass
class Select(Node):
    ctes: list[Cte] = field(default_factory=list)
    distinct: bool = False
    items: list[SelectItem] = field(default_factory=list)
    from_clause: list[FromChain] = field(default_factory=list)
    where: Optional[Node] = None
    group_by: list[Node] = field(default_factory=list)
    having: Optional[Node] = None
    order_by: list[OrderTerm] = field(default_factory=list)
    limit: Optional[Node] = None
    offset: Optional[Node] = None


Expr = Union[
    Literal, ColumnRef, Star, FuncCall, Unary, Binary,
    InList, InSubquery, Between, Case, Cast, ScalarSubquery, Exists,
]
