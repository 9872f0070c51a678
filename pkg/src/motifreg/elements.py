"""Promoter elements: single words and distance-constrained pairs.

Text form (used in every report and on the command line)::

    CGCGT                    simple word
    (TTTCCTA,TTGTTT,400)     pair within 400 nt
    ((A,B,30),C,100)         nested pair
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Union

from motifreg.sequence import canonical_form

_WORD = re.compile(r"[ACGT]+")


@dataclass(frozen=True)
class Simple:
    word: str

    def __post_init__(self):
        if not _WORD.fullmatch(self.word):
            raise ValueError(f"not an uppercase ACGT word: {self.word!r}")

    @property
    def order(self) -> int:
        return 0

    @property
    def depth(self) -> int:
        return 0

    @property
    def key(self) -> str:
        """Strand- and orientation-free identity."""
        return canonical_form(self.word)

    def words(self) -> list[str]:
        return [self.word]

    def __str__(self) -> str:
        return self.word


@dataclass(frozen=True)
class Composite:
    left: "Element"
    right: "Element"
    delta: int

    def __post_init__(self):
        if int(self.delta) != self.delta or self.delta <= 0:
            raise ValueError(f"delta must be a positive integer, got {self.delta!r}")

    @cached_property
    def order(self) -> int:
        return self.left.order + self.right.order + 1

    @cached_property
    def depth(self) -> int:
        return max(self.left.depth, self.right.depth) + 1

    @cached_property
    def key(self) -> str:
        # (a,b,d) and (b,a,d) locate the same midpoints
        a, b = sorted((self.left.key, self.right.key))
        return f"({a},{b},{self.delta})"

    def words(self) -> list[str]:
        return self.left.words() + self.right.words()

    def __str__(self) -> str:
        return f"({self.left},{self.right},{self.delta})"


Element = Union[Simple, Composite]


def element_order(e: Element) -> int:
    return e.order


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, what: str):
        raise ValueError(f"bad element {self.text!r} at offset {self.pos}: expected {what}")

    def expect(self, ch: str):
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            self.fail(repr(ch))
        self.pos += 1

    def element(self) -> Element:
        if self.pos < len(self.text) and self.text[self.pos] == "(":
            self.pos += 1
            left = self.element()
            self.expect(",")
            right = self.element()
            self.expect(",")
            m = re.compile(r"[1-9][0-9]*").match(self.text, self.pos)
            if not m:
                self.fail("positive integer")
            self.pos = m.end()
            self.expect(")")
            return Composite(left, right, int(m.group()))
        m = _WORD.match(self.text, self.pos)
        if not m:
            self.fail("word or '('")
        self.pos = m.end()
        return Simple(m.group())


def parse_element(text: str) -> Element:
    """Inverse of ``str(element)``; rejects spaces and lowercase."""
    p = _Parser(text)
    e = p.element()
    if p.pos != len(text):
        p.fail("end of input")
    return e
