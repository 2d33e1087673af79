# cython: language_level=3
"""Compiled preprocessing kernels; behavioural twin of ``pure.py``.

Any change here must land in pure.py as well — the parity tests fuzz the
two implementations against each other.
"""

IMPLEMENTATION = "c"


cdef inline bint _is_alnum(Py_UCS4 ch):
    return (u"a" <= ch <= u"z") or (u"A" <= ch <= u"Z") or (u"0" <= ch <= u"9")


cdef inline bint _is_out_char(Py_UCS4 ch):
    return _is_alnum(ch) or ch == u"_"


cdef str _strip_comments_and_literals(str text):
    cdef Py_ssize_t i = 0, n = len(text), run_start = -1
    cdef int state = 0  # 0 code, 1 line comment, 2 block comment, 3 string, 4 char
    cdef int depth = 0
    cdef Py_UCS4 ch, nxt
    out = []

    while i < n:
        ch = text[i]
        if state == 0:
            if ch == u"/" and i + 1 < n:
                nxt = text[i + 1]
                if nxt == u"/" or nxt == u"*":
                    if run_start >= 0:
                        out.append(text[run_start:i])
                        run_start = -1
                    state = 1 if nxt == u"/" else 2
                    i += 2
                    continue
            if ch == u'"' or ch == u"'" or ch == u"{" or ch == u"}" or ch == 0x01:
                if run_start >= 0:
                    out.append(text[run_start:i])
                    run_start = -1
                if ch == u'"':
                    state = 3
                    out.append(" ")
                elif ch == u"'":
                    state = 4
                    out.append(" ")
                elif ch == u"{":
                    depth += 1
                    out.append(" ")
                elif ch == u"}":
                    if depth > 0:
                        depth -= 1
                    out.append(" ")
                    if depth == 1:
                        out.append("\x01")
                else:
                    out.append(" ")
                i += 1
                continue
            if run_start < 0:
                run_start = i
            i += 1
        elif state == 1:
            if ch == u"\n":
                out.append("\n")
                state = 0
            i += 1
        elif state == 2:
            if ch == u"*" and i + 1 < n and text[i + 1] == u"/":
                out.append(" ")
                state = 0
                i += 2
                continue
            if ch == u"\n":
                out.append("\n")
            i += 1
        else:  # string or char literal
            if ch == u"\\":
                if run_start >= 0:
                    out.append(text[run_start:i])
                    run_start = -1
                if i + 1 < n and text[i + 1] == u"\n":
                    out.append("\n")
                else:
                    out.append(" ")
                i += 2
                continue
            if ch == 0x01:
                if run_start >= 0:
                    out.append(text[run_start:i])
                    run_start = -1
                out.append(" ")
                i += 1
                continue
            if (state == 3 and ch == u'"') or (state == 4 and ch == u"'") \
                    or ch == u"\n":
                if run_start >= 0:
                    out.append(text[run_start:i])
                    run_start = -1
                if ch == u"\n":
                    # unterminated literal: recover at end of line
                    out.append("\n")
                else:
                    out.append(" ")
                state = 0
                i += 1
                continue
            if run_start < 0:
                run_start = i
            i += 1

    if run_start >= 0:
        out.append(text[run_start:n])
    return "".join(out)


cdef bint _is_import_line(str line):
    cdef Py_ssize_t i = 0, j, n = len(line)
    cdef Py_UCS4 ch
    while i < n:
        ch = line[i]
        if ch == u" " or ch == u"\t" or ch == u"\f" or ch == u"\v" or ch == u"\r":
            i += 1
        else:
            break
    for keyword in ("import", "package"):
        if line.startswith(keyword, i):
            j = i + len(keyword)
            if j >= n:
                return True
            ch = line[j]
            if not (_is_alnum(ch) or ch == u"_" or ch == u"$"):
                return True
    return False


def sanitize_java(str text):
    """Sanitize Java source; returns (clean_text, boundary_offsets)."""
    cdef str stripped = _strip_comments_and_literals(text)
    kept = [line for line in stripped.split("\n") if not _is_import_line(line)]
    cdef str merged = "\n".join(kept)

    cdef Py_ssize_t i, n = len(merged), blen = 0, last_mark = -1
    cdef Py_UCS4 ch
    cdef bytearray buf = bytearray()
    boundaries = []
    for i in range(n):
        ch = merged[i]
        if ch == 0x01:
            if blen != last_mark:
                boundaries.append(blen)
                last_mark = blen
        elif _is_out_char(ch):
            buf.append(<unsigned char> ch)
            blen += 1
        elif blen > 0 and buf[blen - 1] != 0x20:
            buf.append(0x20)
            blen += 1
    if blen > 0 and buf[blen - 1] == 0x20:
        del buf[blen - 1]
    return bytes(buf).decode("ascii"), tuple(boundaries)


def split_tokens_with_offsets(str text):
    """Split text into lowercase identifier parts plus their offsets."""
    cdef Py_ssize_t i = 0, n = len(text), start, k, part_start
    cdef Py_UCS4 prev, cur
    cdef bint prev_digit, cur_digit, prev_upper, cur_upper, boundary
    tokens = []
    offsets = []
    while i < n:
        if not _is_alnum(text[i]):
            i += 1
            continue
        start = i
        i += 1
        while i < n and _is_alnum(text[i]):
            i += 1
        part_start = start
        for k in range(start + 1, i):
            prev = text[k - 1]
            cur = text[k]
            prev_digit = u"0" <= prev <= u"9"
            cur_digit = u"0" <= cur <= u"9"
            boundary = False
            if prev_digit != cur_digit:
                boundary = True
            elif not cur_digit:
                prev_upper = u"A" <= prev <= u"Z"
                cur_upper = u"A" <= cur <= u"Z"
                if not prev_upper and cur_upper:
                    boundary = True
                elif prev_upper and cur_upper and k + 1 < i \
                        and u"a" <= text[k + 1] <= u"z":
                    boundary = True
            if boundary:
                tokens.append(text[part_start:k].lower())
                offsets.append(part_start)
                part_start = k
        tokens.append(text[part_start:i].lower())
        offsets.append(part_start)
    return tokens, offsets


def split_tokens(str text):
    return split_tokens_with_offsets(text)[0]


# ---------------------------------------------------------------------------
# Porter suffix stemmer (classic 1980 rule set); mirrors pure.py exactly.
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


cdef bytes _cons_flags(str word):
    cdef Py_ssize_t i, n = len(word)
    cdef Py_UCS4 ch
    cdef bytearray flags = bytearray(n)
    for i in range(n):
        ch = word[i]
        if ch == u"a" or ch == u"e" or ch == u"i" or ch == u"o" or ch == u"u":
            flags[i] = 0
        elif ch == u"y":
            flags[i] = 1 if i == 0 else (0 if flags[i - 1] else 1)
        else:
            flags[i] = 1
    return bytes(flags)


cdef int _measure(bytes flags, Py_ssize_t j):
    cdef int m = 0
    cdef Py_ssize_t i = 0
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


cdef bint _has_vowel(bytes flags, Py_ssize_t j):
    cdef Py_ssize_t i
    for i in range(j):
        if not flags[i]:
            return True
    return False


cdef bint _ends_double_cons(str word, bytes flags):
    cdef Py_ssize_t n = len(word)
    return n >= 2 and word[n - 1] == word[n - 2] and flags[n - 1]


cdef bint _ends_cvc(str word, bytes flags, Py_ssize_t j):
    cdef Py_UCS4 last
    if j < 3:
        return False
    if not (flags[j - 3] and not flags[j - 2] and flags[j - 1]):
        return False
    last = word[j - 1]
    return last != u"w" and last != u"x" and last != u"y"


def porter_stem(str word):
    """Stem one lowercase token; non a-z tokens pass through unchanged."""
    cdef Py_ssize_t i, j, n = len(word)
    cdef Py_UCS4 ch
    cdef int m
    if n <= 2:
        return word
    for i in range(n):
        ch = word[i]
        if not (u"a" <= ch <= u"z"):
            return word

    cdef str w = word
    cdef bytes flags

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
            elif _ends_double_cons(w, flags) and not (
                w.endswith("l") or w.endswith("s") or w.endswith("z")
            ):
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
                if suffix != "ion" or (j > 0 and (w[j - 1] == u"s" or w[j - 1] == u"t")):
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
