"""Recursive-descent parser for single read-only SELECT statements.

Covers the subset the generators emit and the validator must reason about:
WITH-prefixed selects, joins with ON/USING, subqueries, CASE/CAST/EXISTS,
aggregate calls, GROUP BY / HAVING / ORDER BY / LIMIT / OFFSET. Anything
outside the grammar raises ``ParseError`` carrying the offending token so the
validator can distinguish mutating statements from plain junk.
"""

from __future__ import annotations

from typing import Optional

from ..errors import ParseError
from . import ast
from .lexer import EOF, NUMBER, OP, QUOTED, STRING, WORD, Token, tokenize

# Words that end a bare alias or select item; never usable as implicit aliases.
RESERVED = {
    "SELECT", "FROM", "WHERE", "GROUP", "HAVING", "ORDER", "LIMIT", "OFFSET",
    "ON", "USING", "JOIN", "INNER", "LEFT", "RIGHT", "FULL", "OUTER", "CROSS",
    "NATURAL", "AND", "OR", "NOT", "AS", "BY", "ASC", "DESC", "UNION",
    "INTERSECT", "EXCEPT", "WHEN", "THEN", "ELSE", "END", "CASE", "IS", "IN",
    "BETWEEN", "LIKE", "GLOB", "ESCAPE", "NULL", "DISTINCT", "ALL", "EXISTS",
    "CAST", "WITH", "RECURSIVE", "NULLS", "FIRST", "LAST", "COLLATE", "VALUES",
    "INTO",
}

_COMPARISONS = {"=", "==", "!=", "<>", "<", "<=", ">", ">="}


def parse_select_statement(sql_or_tokens) -> ast.Select:
    """Parse exactly one SELECT (optionally WITH-prefixed) statement."""
    tokens = tokenize(sql_or_tokens) if isinstance(sql_or_tokens, str) else sql_or_tokens
    parser = _Parser(tokens)
    select = parser.parse_statement()
    parser.expect_end()
    return select


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = [t for t in tokens if t.kind != EOF]
        self.pos = 0

    # --- token plumbing ---------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        idx = self.pos + ahead
        if idx < len(self.tokens):
            return self.tokens[idx]
        end = self.tokens[-1].end if self.tokens else 0
        return Token(EOF, "", end, end)

    def advance(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def fail(self, tok: Token, expected: str) -> ParseError:
        shown = tok.text or "end of input"
        return ParseError(
            f"expected {expected}, found {shown!r} at offset {tok.start}",
            token=tok.upper if tok.kind == WORD else tok.text,
        )

    def at_word(self, *words: str) -> bool:
        return self.peek().is_word(*words)

    def take_word(self, *words: str) -> bool:
        if self.at_word(*words):
            self.advance()
            return True
        return False

    def expect_word(self, word: str) -> Token:
        if not self.at_word(word):
            raise self.fail(self.peek(), word)
        return self.advance()

    def at_op(self, op: str) -> bool:
        tok = self.peek()
        return tok.kind == OP and tok.text == op

    def take_op(self, op: str) -> bool:
        if self.at_op(op):
            self.advance()
            return True
        return False

    def expect_op(self, op: str) -> Token:
        if not self.at_op(op):
            raise self.fail(self.peek(), repr(op))
        return self.advance()

    def expect_end(self) -> None:
        tok = self.peek()
        if tok.kind != EOF:
            if tok.is_word("UNION", "INTERSECT", "EXCEPT"):
                raise ParseError("compound SELECT is not supported", token=tok.upper)
            raise self.fail(tok, "end of statement")

    # --- statements ---------------------------------------------------------

    def parse_statement(self) -> ast.Select:
        tok = self.peek()
        if tok.kind != WORD or tok.upper not in ("SELECT", "WITH"):
            raise self.fail(tok, "SELECT or WITH")
        return self.parse_select()

    def parse_select(self) -> ast.Select:
        ctes: list[ast.Cte] = []
        if self.take_word("WITH"):
            self.take_word("RECURSIVE")
            while True:
                ctes.append(self.parse_cte())
                if not self.take_op(","):
                    break
        self.expect_word("SELECT")
        select = ast.Select(ctes=ctes)
        if not self.take_word("ALL"):
            select.distinct = self.take_word("DISTINCT")
        select.items.append(self.parse_select_item())
        while self.take_op(","):
            select.items.append(self.parse_select_item())
        if self.take_word("FROM"):
            select.from_clause.append(self.parse_from_chain())
            while self.take_op(","):
                select.from_clause.append(self.parse_from_chain())
        if self.take_word("WHERE"):
            select.where = self.parse_expr()
        if self.take_word("GROUP"):
            self.expect_word("BY")
            select.group_by.append(self.parse_expr())
            while self.take_op(","):
                select.group_by.append(self.parse_expr())
        if self.take_word("HAVING"):
            select.having = self.parse_expr()
        if self.take_word("ORDER"):
            self.expect_word("BY")
            select.order_by.append(self.parse_order_term())
            while self.take_op(","):
                select.order_by.append(self.parse_order_term())
        if self.take_word("LIMIT"):
            first = self.parse_expr()
            if self.take_op(","):        # MySQL style: LIMIT offset, count
                select.offset = first
                select.limit = self.parse_expr()
            else:
                select.limit = first
                if self.take_word("OFFSET"):
                    select.offset = self.parse_expr()
        return select

    def parse_cte(self) -> ast.Cte:
        name = self.parse_identifier("CTE name")
        columns: list[str] = []
        if self.take_op("("):
            columns.append(self.parse_identifier("column name"))
            while self.take_op(","):
                columns.append(self.parse_identifier("column name"))
            self.expect_op(")")
        self.expect_word("AS")
        self.expect_op("(")
        select = self.parse_select()
        self.expect_op(")")
        return ast.Cte(name=name, columns=columns, select=select)

    def parse_identifier(self, what: str) -> str:
        tok = self.peek()
        if tok.kind == QUOTED:
            self.advance()
            return tok.text
        if tok.kind == WORD and tok.upper not in RESERVED:
            self.advance()
            return tok.text
        raise self.fail(tok, what)

    def parse_select_item(self) -> ast.SelectItem:
        if self.take_op("*"):
            return ast.SelectItem(expr=ast.Star())
        tok, nxt, dot_star = self.peek(), self.peek(1), self.peek(2)
        if (
            tok.kind in (WORD, QUOTED)
            and (tok.kind == QUOTED or tok.upper not in RESERVED)
            and nxt.kind == OP and nxt.text == "."
            and dot_star.kind == OP and dot_star.text == "*"
        ):
            self.pos += 3
            return ast.SelectItem(expr=ast.Star(table=tok.text))
        expr = self.parse_expr()
        alias = self.parse_optional_alias()
        return ast.SelectItem(expr=expr, alias=alias)

    def parse_optional_alias(self) -> Optional[str]:
        if self.take_word("AS"):
            return self.parse_identifier("alias")
        tok = self.peek()
        if tok.kind == QUOTED or (tok.kind == WORD and tok.upper not in RESERVED):
            self.advance()
            return tok.text
        return None

    # --- from clause ---------------------------------------------------------

    def parse_from_chain(self) -> ast.FromChain:
        chain = ast.FromChain(first=self.parse_table_source())
        while True:
            join = self.parse_join()
            if join is None:
                return chain
            chain.joins.append(join)

    def parse_table_source(self) -> ast.TableSource:
        if self.take_op("("):
            if not self.at_word("SELECT", "WITH"):
                raise self.fail(self.peek(), "SELECT or WITH subquery")
            select = self.parse_select()
            self.expect_op(")")
            alias = self.parse_optional_alias()
            return ast.TableSource(subquery=select, alias=alias)
        name = self.parse_identifier("table name")
        if self.at_op(".") and self.peek(1).kind in (WORD, QUOTED):
            self.advance()
            name = f"{name}.{self.parse_identifier('table name')}"
        alias = self.parse_optional_alias()
        return ast.TableSource(name=name, alias=alias)

    def parse_join(self) -> Optional[ast.Join]:
        natural = False
        join_type = "inner"
        start = self.pos
        if self.take_word("NATURAL"):
            natural = True
        if self.take_word("INNER"):
            pass
        elif self.take_word("LEFT"):
            join_type = "left"
            self.take_word("OUTER")
        elif self.take_word("RIGHT"):
            join_type = "right"
            self.take_word("OUTER")
        elif self.take_word("FULL"):
            join_type = "full"
            self.take_word("OUTER")
        elif self.take_word("CROSS"):
            join_type = "cross"
        if not self.take_word("JOIN"):
            if self.pos != start:
                raise self.fail(self.peek(), "JOIN")
            return None
        if natural:
            join_type = f"natural-{join_type}"
        source = self.parse_table_source()
        on = None
        using: list[str] = []
        if self.take_word("ON"):
            on = self.parse_expr()
        elif self.take_word("USING"):
            self.expect_op("(")
            using.append(self.parse_identifier("column name"))
            while self.take_op(","):
                using.append(self.parse_identifier("column name"))
            self.expect_op(")")
        return ast.Join(join_type=join_type, source=source, on=on, using=using)

    def parse_order_term(self) -> ast.OrderTerm:
        expr = self.parse_expr()
        direction = None
        if self.take_word("ASC"):
            direction = "asc"
        elif self.take_word("DESC"):
            direction = "desc"
        if self.take_word("NULLS"):
            if not (self.take_word("FIRST") or self.take_word("LAST")):
                raise self.fail(self.peek(), "FIRST or LAST")
        return ast.OrderTerm(expr=expr, direction=direction)

    # --- expressions -----------------------------------------------------------

    def parse_expr(self) -> ast.Node:
        return self.parse_or()

    def parse_or(self) -> ast.Node:
        left = self.parse_and()
        while self.take_word("OR"):
            left = ast.Binary("OR", left, self.parse_and())
        return left

    def parse_and(self) -> ast.Node:
        left = self.parse_not()
        while self.take_word("AND"):
            left = ast.Binary("AND", left, self.parse_not())
        return left

    def parse_not(self) -> ast.Node:
        if self.take_word("NOT"):
            return ast.Unary("NOT", self.parse_not())
        return self.parse_predicate()

    def parse_predicate(self) -> ast.Node:
        left = self.parse_comparison()
        while True:
            if self.take_word("IS"):
                negated = self.take_word("NOT")
                right = self.parse_comparison()
                left = ast.Binary("IS NOT" if negated else "IS", left, right)
                continue
            negated = False
            if self.at_word("NOT") and self.peek(1).is_word("IN", "BETWEEN", "LIKE", "GLOB"):
                self.advance()
                negated = True
            if self.take_word("IN"):
                self.expect_op("(")
                if self.at_word("SELECT", "WITH"):
                    select = self.parse_select()
                    self.expect_op(")")
                    left = ast.InSubquery(left, select, negated)
                else:
                    items = [self.parse_expr()]
                    while self.take_op(","):
                        items.append(self.parse_expr())
                    self.expect_op(")")
                    left = ast.InList(left, items, negated)
                continue
            if self.take_word("BETWEEN"):
                low = self.parse_comparison()
                self.expect_word("AND")
                high = self.parse_comparison()
                left = ast.Between(left, low, high, negated)
                continue
            if self.at_word("LIKE", "GLOB"):
                op = self.advance().upper
                pattern = self.parse_comparison()
                if self.take_word("ESCAPE"):
                    self.parse_comparison()
                left = ast.Binary("NOT " + op if negated else op, left, pattern)
                continue
            if negated:
                raise self.fail(self.peek(), "IN, BETWEEN, LIKE or GLOB")
            return left

    def parse_comparison(self) -> ast.Node:
        left = self.parse_additive()
        while self.peek().kind == OP and self.peek().text in _COMPARISONS:
            op = self.advance().text
            left = ast.Binary(op, left, self.parse_additive())
        return left

    def parse_additive(self) -> ast.Node:
        left = self.parse_multiplicative()
        while self.peek().kind == OP and self.peek().text in ("+", "-", "||"):
            op = self.advance().text
            left = ast.Binary(op, left, self.parse_multiplicative())
        return left

    def parse_multiplicative(self) -> ast.Node:
        left = self.parse_unary()
        while self.peek().kind == OP and self.peek().text in ("*", "/", "%"):
            op = self.advance().text
            left = ast.Binary(op, left, self.parse_unary())
        return left

    def parse_unary(self) -> ast.Node:
        if self.peek().kind == OP and self.peek().text in ("+", "-"):
            op = self.advance().text
            return ast.Unary(op, self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self) -> ast.Node:
        expr = self.parse_primary()
        while self.take_word("COLLATE"):
            self.parse_identifier("collation name")
        return expr

    def parse_primary(self) -> ast.Node:
        tok = self.peek()
        if tok.kind == NUMBER:
            self.advance()
            text = tok.text
            if text.lower().startswith("0x"):
                return ast.Literal(int(text, 16), "number")
            value = float(text) if any(c in text for c in ".eE") else int(text)
            return ast.Literal(value, "number")
        if tok.kind == STRING:
            self.advance()
            return ast.Literal(tok.text, "string")
        if tok.kind == OP and tok.text == "?":
            self.advance()
            return ast.Literal(None, "param")
        if tok.kind == OP and tok.text == "(":
            self.advance()
            if self.at_word("SELECT", "WITH"):
                select = self.parse_select()
                self.expect_op(")")
                return ast.ScalarSubquery(select)
            expr = self.parse_expr()
            self.expect_op(")")
            return expr
        if tok.kind == WORD:
            upper = tok.upper
            if upper == "NULL":
                self.advance()
                return ast.Literal(None, "null")
            if upper in ("TRUE", "FALSE"):
                self.advance()
                return ast.Literal(upper == "TRUE", "bool")
            if upper == "CAST":
                self.advance()
                self.expect_op("(")
                expr = self.parse_expr()
                self.expect_word("AS")
                type_name = self.parse_type_name()
                self.expect_op(")")
                return ast.Cast(expr, type_name)
            if upper == "CASE":
                return self.parse_case()
            if upper == "EXISTS":
                self.advance()
                self.expect_op("(")
                select = self.parse_select()
                self.expect_op(")")
                return ast.Exists(select)
        if tok.kind in (WORD, QUOTED):
            if tok.kind == WORD and tok.upper in RESERVED:
                raise self.fail(tok, "an expression")
            nxt = self.peek(1)
            if tok.kind == WORD and nxt.kind == OP and nxt.text == "(":
                return self.parse_func_call()
            return self.parse_column_ref()
        raise self.fail(tok, "an expression")

    def parse_func_call(self) -> ast.FuncCall:
        name = self.advance().text
        self.expect_op("(")
        call = ast.FuncCall(name=name)
        if self.take_op(")"):
            return call
        if self.take_op("*"):
            call.star = True
            self.expect_op(")")
            return call
        call.distinct = self.take_word("DISTINCT")
        call.args.append(self.parse_expr())
        while self.take_op(","):
            call.args.append(self.parse_expr())
        self.expect_op(")")
        return call

    def parse_column_ref(self) -> ast.ColumnRef:
        first = self.advance().text
        if self.at_op(".") and self.peek(1).kind in (WORD, QUOTED):
            self.advance()
            tok = self.peek()
            if tok.kind == WORD and tok.upper in RESERVED:
                raise self.fail(tok, "column name")
            self.advance()
            return ast.ColumnRef(table=first, name=tok.text)
        return ast.ColumnRef(table=None, name=first)

    def parse_case(self) -> ast.Case:
        self.expect_word("CASE")
        operand = None
        if not self.at_word("WHEN"):
            operand = self.parse_expr()
        whens: list[tuple[ast.Node, ast.Node]] = []
        while self.take_word("WHEN"):
            cond = self.parse_expr()
            self.expect_word("THEN")
            whens.append((cond, self.parse_expr()))
        if not whens:
            raise self.fail(self.peek(), "WHEN")
        else_ = None
        if self.take_word("ELSE"):
            else_ = self.parse_expr()
        self.expect_word("END")
        return ast.Case(operand=operand, whens=whens, else_=else_)

    def parse_type_name(self) -> str:
        parts = [self.parse_identifier("type name")]
        while self.peek().kind == WORD and self.peek().upper not in RESERVED:
            parts.append(self.advance().text)
        if self.take_op("("):
            self.advance()  # precision
            if self.take_op(","):
                self.advance()
            self.expect_op(")")
        return " ".join(parts)
