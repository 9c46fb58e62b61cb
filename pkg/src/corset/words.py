"""Words over a symmetrized alphabet of formal generators.

A letter is a nonzero int: +i is the i-th generator (1-based), -i its
inverse.  A word is a tuple of letters.  Generating sets are always
symmetrized: every generator's inverse is available as a letter.
"""

from .errors import SpecError

IDENTITY_WORD = ()


def inv_letter(letter):
    return -letter


def free_reduce(word):
    """Freely reduce a word: cancel adjacent letter/inverse pairs.

    Idempotent; returns a tuple.
    """
    out = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def free_multiply(u, v):
    """Product of freely reduced words, reduced at the junction."""
    u = list(u)
    i = 0
    n = len(v)
    while u and i < n and u[-1] == -v[i]:
        u.pop()
        i += 1
    return tuple(u) + tuple(v[i:])


def free_invert(word):
    return tuple(-letter for letter in reversed(word))


def is_reduced(word):
    return all(word[i] != -word[i + 1] for i in range(len(word) - 1))


def parse_word(text, names):
    """Parse a word string like "a b A" (uppercase = inverse) into letters.

    Letters may be separated by whitespace; single-character names may also
    be run together ("abA").  Raises SpecError on unknown names.
    """
    index = {name: k + 1 for k, name in enumerate(names)}
    tokens = text.split()
    if all(len(name) == 1 for name in names):
        # allow compact form with no separators
        tokens = [ch for tok in tokens for ch in tok]
    letters = []
    for tok in tokens:
        if tok in index:
            letters.append(index[tok])
        elif tok.lower() in index and tok != tok.lower():
            letters.append(-index[tok.lower()])
        else:
            raise SpecError(f"unknown generator {tok!r} (known: {', '.join(names)})")
    return tuple(letters)


def format_word(word, names):
    if not word:
        return "1"
    parts = []
    for letter in word:
        name = names[abs(letter) - 1]
        parts.append(name if letter > 0 else name.upper())
    return " ".join(parts)


def substitute(word, images):
    """Apply a substitution letter -> word; images[i] is the image of letter i+1."""
    out = ()
    for letter in word:
        img = images[abs(letter) - 1]
        out = free_multiply(out, img if letter > 0 else free_invert(img))
    return out
