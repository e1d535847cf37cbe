"""Vocabularies built from the training corpus: words, affixes, roles,
and the action inventory that defines the logit layer.

Id 0 is reserved in every table for out-of-vocabulary / absent values.
Word shape features (hyphenation, capitalization, punctuation, quotes,
digits) are closed categorical sets and need no vocabulary.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

from ..document import Document
from ..transitions import Action

RESERVED = 0

HYPHEN_SHAPES = 2
CAPS_SHAPES = 4
PUNCT_SHAPES = 3
QUOTE_SHAPES = 2
DIGIT_SHAPES = 3

_PUNCT = set(string.punctuation)
_QUOTES = set("\"'`")


def hyphen_shape(word: str) -> int:
    return 1 if "-" in word else 0


def caps_shape(word: str) -> int:
    letters = [c for c in word if c.isalpha()]
    if not letters or all(c.islower() for c in letters):
        return 0
    if all(c.isupper() for c in letters):
        return 2
    if word[0].isupper() and all(c.islower() for c in letters[1:]):
        return 1
    return 3


def punct_shape(word: str) -> int:
    flags = [c in _PUNCT for c in word]
    if not any(flags):
        return 0
    return 2 if all(flags) else 1


def quote_shape(word: str) -> int:
    return 1 if any(c in _QUOTES for c in word) else 0


def digit_shape(word: str) -> int:
    flags = [c.isdigit() for c in word]
    if not any(flags):
        return 0
    return 2 if all(flags) else 1


def _affixes(word: str, max_len: int, suffix: bool) -> list[str]:
    out = []
    for n in range(1, max_len + 1):
        if len(word) >= n:
            out.append(word[-n:] if suffix else word[:n])
    return out


@dataclass
class Lexicon:
    words: dict[str, int]
    prefixes: dict[str, int]
    suffixes: dict[str, int]
    roles: dict[str, int]
    actions: list[Action]
    max_affix_len: int

    def __post_init__(self) -> None:
        self.action_ids = {a: i for i, a in enumerate(self.actions)}

    @classmethod
    def build(cls, corpus: list[Document], sequences: list[list[Action]],
              max_affix_len: int) -> "Lexicon":
        words: set[str] = set()
        prefixes: set[str] = set()
        suffixes: set[str] = set()
        for doc in corpus:
            for token in doc.tokens:
                words.add(token.text)
                prefixes.update(_affixes(token.text, max_affix_len, suffix=False))
                suffixes.update(_affixes(token.text, max_affix_len, suffix=True))
        roles: set[str] = set()
        actions: set[Action] = set()
        for sequence in sequences:
            for action in sequence:
                actions.add(action)
                if action.role is not None:
                    roles.add(action.role)
        return cls(
            words={w: i for i, w in enumerate(sorted(words), start=1)},
            prefixes={p: i for i, p in enumerate(sorted(prefixes), start=1)},
            suffixes={s: i for i, s in enumerate(sorted(suffixes), start=1)},
            roles={r: i for i, r in enumerate(sorted(roles), start=1)},
            actions=sorted(actions, key=lambda a: a.to_text()),
            max_affix_len=max_affix_len,
        )

    # -- sizes -----------------------------------------------------------

    @property
    def num_words(self) -> int:
        return len(self.words) + 1

    @property
    def num_prefixes(self) -> int:
        return len(self.prefixes) + 1

    @property
    def num_suffixes(self) -> int:
        return len(self.suffixes) + 1

    @property
    def num_roles(self) -> int:
        return len(self.roles) + 1

    @property
    def num_actions(self) -> int:
        return len(self.actions)

    # -- lookups ---------------------------------------------------------

    def word_id(self, word: str) -> int:
        return self.words.get(word, RESERVED)

    def prefix_ids(self, word: str) -> list[int]:
        ids = [self.prefixes.get(p, RESERVED)
               for p in _affixes(word, self.max_affix_len, suffix=False)]
        return ids + [RESERVED] * (self.max_affix_len - len(ids))

    def suffix_ids(self, word: str) -> list[int]:
        ids = [self.suffixes.get(s, RESERVED)
               for s in _affixes(word, self.max_affix_len, suffix=True)]
        return ids + [RESERVED] * (self.max_affix_len - len(ids))

    def role_id(self, role: str) -> int:
        return self.roles.get(role, RESERVED)

    def action_id(self, action: Action) -> int:
        return self.action_ids[action]
