"""Pure-Python implementations of the preprocessing hot kernels.

Three routines dominate indexing time: the Java sanitizer (a per-character
state machine), the compound-identifier splitter, and the suffix stemmer.
``_speedups.pyx`` is the compiled twin of this module; the two must stay
behaviourally identical (tests/test_kernels_parity.py fuzzes them against
each other).
"""

from __future__ import annotations

IMPLEMENTATION = "python"

# Sentinel marking a method-close boundary inside intermediate text.
# Raw occurrences of this control char are scrubbed in the CODE state,
# so it can never leak in from the input.
_MARK = "\x01"

_CODE, _LINE_COMMENT, _BLOCK_COMMENT, _STRING, _CHAR = range(5)


def _strip_comments_and_literals(text: str) -> str:
    """Remove comments, unquote literals, and mark method-close braces.

    Newlines inside comments are preserved so that line-based import
    stripping still sees the original line structure.  A ``}`` that drops
    the brace depth back to 1 (a method closing inside a top-level class
    body) is followed by the boundary sentinel.
    """
    out: list[str] = []
    state = _CODE
    depth = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if state == _CODE:
            if ch == "/" and i + 1 < n and text[i + 1] == "/":
                state = _LINE_COMMENT
                i += 2
                continue
            if ch == "/" and i + 1 < n and text[i + 1] == "*":
                state = _BLOCK_COMMENT
                i += 2
                continue
            if ch == '"':
                state = _STRING
                out.append(" ")
                i += 1
                continue
            if ch == "'":
                state = _CHAR
                out.append(" ")
                i += 1
                continue
            if ch == "{":
                depth += 1
                out.append(" ")
                i += 1
                continue
            if ch == "}":
                if depth > 0:
                    depth -= 1
                out.append(" ")
                if depth == 1:
                    out.append(_MARK)
                i += 1
                continue
            out.append(" " if ch == _MARK else ch)
            i += 1
        elif state == _LINE_COMMENT:
            if ch == "\n":
                out.append("\n")
                state = _CODE
            i += 1
        elif state == _BLOCK_COMMENT:
            if ch == "*" and i + 1 < n and text[i + 1] == "/":
                out.append(" ")
                state = _CODE
                i += 2
                continue
            if ch == "\n":
                out.append("\n")
            i += 1
        else:  # _STRING or _CHAR
            if ch == "\\":
                nxt = text[i + 1] if i + 1 < n else ""
                out.append("\n" if nxt == "\n" else " ")
                i += 2
                continue
            if (state == _STRING and ch == '"') or (state == _CHAR and ch == "'"):
                out.append(" ")
                state = _CODE
                i += 1
                continue
            if ch == "\n":
                # Unterminated literal: recover at end of line so one stray
                # quote cannot swallow the rest of the file.
                out.append("\n")
                state = _CODE
                i += 1
                continue
            out.append(" " if ch == _MARK else ch)
            i += 1
    return "".join(out)


def _is_word_char(ch: str) -> bool:
    return (
        ("a" <= ch <= "z")
        or ("A" <= ch <= "Z")
        or ("0" <= ch <= "9")
        or ch == "_"
        or ch == "$"
    )


def _is_import_line(line: str) -> bool:
    i = 0
    n = len(line)
    while i < n and line[i] in " \t\f\v\r":
        i += 1
    for keyword in ("import", "package"):
        if line.startswith(keyword, i):
            j = i + len(keyword)
            if j >= n or not _is_word_char(line[j]):
                return True
    return False


def sanitize_java(text: str) -> tuple[str, tuple[int, ...]]:
    """Sanitize Java source down to identifier-ish text.

    Returns ``(clean, boundaries)`` where ``clean`` contains only
    ``[A-Za-z0-9_]`` words separated by single spaces, and ``boundaries``
    are character offsets into ``clean``: a word starting at or past a
    boundary belongs to the next method-sized chunk.
    """
    stripped = _strip_comments_and_literals(text)
    kept = [line for line in stripped.split("\n") if not _is_import_line(line)]
    merged = "\n".join(kept)

    out: list[str] = []
    boundaries: list[int] = []
    for ch in merged:
        if ch == _MARK:
            pos = len(out)
            if not boundaries or boundaries[-1] != pos:
                boundaries.append(pos)
        elif (
            ("a" <= ch <= "z")
            or ("A" <= ch <= "Z")
            or ("0" <= ch <= "9")
            or ch == "_"
        ):
            out.append(ch)
        elif out and out[-1] != " ":
            out.append(" ")
    if out and out[-1] == " ":
        out.pop()
    return "".join(out), tuple(boundaries)


def _is_ascii_alnum(ch: str) -> bool:
    return ("a" <= ch <= "z") or ("A" <= ch <= "Z") or ("0" <= ch <= "9")


def split_tokens_with_offsets(text: str) -> tuple[list[str], list[int]]:
    """Split arbitrary text into lowercase identifier parts.

    Any non-alphanumeric character separates runs; within a run, parts
    split at camelCase humps (including acronym runs like HTTPResponse)
    and letter/digit boundaries.  Offsets give each part's character
    position in ``text``.
    """
    tokens: list[str] = []
    offsets: list[int] = []
    i = 0
    n = len(text)
    while i < n:
        if not _is_ascii_alnum(text[i]):
            i += 1
            continue
        start = i
        i += 1
        while i < n and _is_ascii_alnum(text[i]):
            i += 1
        _split_run(text, start, i, tokens, offsets)
    return tokens, offsets


def _split_run(
    text: str, start: int, end: int, tokens: list[str], offsets: list[int]
) -> None:
    part_start = start
    for k in range(start + 1, end):
        prev = text[k - 1]
        cur = text[k]
        prev_digit = "0" <= prev <= "9"
        cur_digit = "0" <= cur <= "9"
        boundary = False
        if prev_digit != cur_digit:
            boundary = True
        elif not cur_digit:
            prev_upper = "A" <= prev <= "Z"
            cur_upper = "A" <= cur <= "Z"
            if not prev_upper and cur_upper:
                boundary = True
            elif (
                prev_upper
                and cur_upper
                and k + 1 < end
                and "a" <= text[k + 1] <= "z"
            ):
                boundary = True
        if boundary:
            tokens.append(text[part_start:k].lower())
            offsets.append(part_start)
            part_start = k
    tokens.append(text[part_start:end].lower())
    offsets.append(part_start)


def split_tokens(text: str) -> list[str]:
    return split_tokens_with_offsets(text)[0]


# ---------------------------------------------------------------------------
# Porter suffix stemmer (classic 1980 rule set).
# ---------------------------------------------------------------------------

_STEP2 = (
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
)

_STEP3 = (
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
)

_STEP4 = (
    "al",
    "ance",
    "ence",
    "er",
    "ic",
    "able",
    "ible",
    "ant",
    "ement",
    "ment",
    "ent",
    "ion",
    "ou",
    "ism",
    "ate",
    "iti",
    "ous",
    "ive",
    "ize",
)


def _cons_flags(word: str) -> list[bool]:
    # True = consonant.  'y' is a consonant unless it follows one.
    flags: list[bool] = []
    for i, ch in enumerate(word):
        if ch in "aeiou":
            flags.append(False)
        elif ch == "y":
            flags.append(True if i == 0 else not flags[i - 1])
        else:
            flags.append(True)
    return flags


def _measure(flags: list[bool], j: int) -> int:
    # Number of vowel-consonant sequences in word[:j].
    m = 0
    i = 0
    while i < j and flags[i]:
        i += 1
    while True:
        while i < j and not flags[i]:
            i += 1
        if i >= j:
            return m
        while i < j and flags[i]:
            i += 1
        m += 1
        if i >= j:
            return m


def _has_vowel(flags: list[bool], j: int) -> bool:
    for i in range(j):
        if not flags[i]:
            return True
    return False


def _ends_double_cons(word: str, flags: list[bool]) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and flags[-1]


def _ends_cvc(word: str, flags: list[bool], j: int) -> bool:
    # word[:j] ends consonant-vowel-consonant, last one not w, x, or y.
    if j < 3:
        return False
    if not (flags[j - 3] and not flags[j - 2] and flags[j - 1]):
        return False
    return word[j - 1] not in "wxy"


def porter_stem(word: str) -> str:
    """Stem one lowercase token; non a-z tokens pass through unchanged."""
    if len(word) <= 2:
        return word
    for ch in word:
        if not ("a" <= ch <= "z"):
            return word

    w = word

    # Step 1a
    if w.endswith("sses"):
        w = w[:-2]
    elif w.endswith("ies"):
        w = w[:-2]
    elif not w.endswith("ss") and w.endswith("s"):
        w = w[:-1]

    # Step 1b
    flags = _cons_flags(w)
    if w.endswith("eed"):
        if _measure(flags, len(w) - 3) > 0:
            w = w[:-1]
    else:
        fired = False
        if w.endswith("ed") and _has_vowel(flags, len(w) - 2):
            w = w[:-2]
            fired = True
        elif w.endswith("ing") and _has_vowel(flags, len(w) - 3):
            w = w[:-3]
            fired = True
        if fired:
            flags = _cons_flags(w)
            if w.endswith("at") or w.endswith("bl") or w.endswith("iz"):
                w += "e"
            elif _ends_double_cons(w, flags) and w[-1] not in "lsz":
                w = w[:-1]
            elif _measure(flags, len(w)) == 1 and _ends_cvc(w, flags, len(w)):
                w += "e"

    # Step 1c
    flags = _cons_flags(w)
    if w.endswith("y") and _has_vowel(flags, len(w) - 1):
        w = w[:-1] + "i"

    # Step 2
    flags = _cons_flags(w)
    for suffix, repl in _STEP2:
        if w.endswith(suffix):
            if _measure(flags, len(w) - len(suffix)) > 0:
                w = w[: -len(suffix)] + repl
            break

    # Step 3
    flags = _cons_flags(w)
    for suffix, repl in _STEP3:
        if w.endswith(suffix):
            if _measure(flags, len(w) - len(suffix)) > 0:
                w = w[: -len(suffix)] + repl
            break

    # Step 4
    flags = _cons_flags(w)
    for suffix in _STEP4:
        if w.endswith(suffix):
            j = len(w) - len(suffix)
            if _measure(flags, j) > 1:
                if suffix != "ion" or (j > 0 and w[j - 1] in "st"):
                    w = w[:j]
            break

    # Step 5a
    flags = _cons_flags(w)
    if w.endswith("e"):
        j = len(w) - 1
        m = _measure(flags, j)
        if m > 1 or (m == 1 and not _ends_cvc(w, flags, j)):
            w = w[:-1]

    # Step 5b
    flags = _cons_flags(w)
    if w.endswith("l") and _ends_double_cons(w, flags) and _measure(flags, len(w)) > 1:
        w = w[:-1]

    return w
