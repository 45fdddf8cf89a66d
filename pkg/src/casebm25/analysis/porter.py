"""Porter stemmer, reference (Martin Porter's published code) variant.

Follows the C/Java reference implementations rather than the original 1980 description:
step 2 maps ``bli -> ble`` (not ``abli -> able``) and adds ``logi -> log``,
and words of length <= 2 are returned unchanged. This is also the variant
behind Lucene's ``PorterStemFilter``. Input is expected to be lowercase.
"""

from functools import lru_cache


class _Stemmer:
    __slots__ = ("b", "k", "j")

    def __init__(self, word: str):
        self.b = list(word)
        self.k = len(word) - 1
        self.j = 0

    def cons(self, i: int) -> bool:
        ch = self.b[i]
        if ch in "aeiou":
            return False
        if ch == "y":
            return i == 0 or not self.cons(i - 1)
        return True

    def m(self) -> int:
        """Number of consonant-vowel sequences in b[0..j]."""
        n = 0
        i = 0
        j = self.j
        while True:
            if i > j:
                return n
            if not self.cons(i):
                break
            i += 1
        i += 1
        while True:
            while True:
                if i > j:
                    return n
                if self.cons(i):
                    break
                i += 1
            i += 1
            n += 1
            while True:
                if i > j:
                    return n
                if not self.cons(i):
                    break
                i += 1
            i += 1

    def vowel_in_stem(self) -> bool:
        return any(not self.cons(i) for i in range(self.j + 1))

    def doublec(self, j: int) -> bool:
        return j >= 1 and self.b[j] == self.b[j - 1] and self.cons(j)

    def cvc(self, i: int) -> bool:
        if i < 2 or not self.cons(i) or self.cons(i - 1) or not self.cons(i - 2):
            return False
        return self.b[i] not in "wxy"

    def ends(self, s: str) -> bool:
        n = len(s)
        if n > self.k + 1:
            return False
        if "".join(self.b[self.k - n + 1 : self.k + 1]) != s:
            return False
        self.j = self.k - n
        return True

    def setto(self, s: str) -> None:
        del self.b[self.j + 1 :]
        self.b.extend(s)
        self.k = self.j + len(s)

    def r(self, s: str) -> None:
        if self.m() > 0:
            self.setto(s)

    def step1ab(self) -> None:
        b = self.b
        if b[self.k] == "s":
            if self.ends("sses"):
                self.k -= 2
            elif self.ends("ies"):
                self.setto("i")
            elif b[self.k - 1] != "s":
                self.k -= 1
        del b[self.k + 1 :]
        if self.ends("eed"):
            if self.m() > 0:
                self.k -= 1
        elif (self.ends("ed") or self.ends("ing")) and self.vowel_in_stem():
            self.k = self.j
            del b[self.k + 1 :]
            if self.ends("at"):
                self.setto("ate")
            elif self.ends("bl"):
                self.setto("ble")
            elif self.ends("iz"):
                self.setto("ize")
            elif self.doublec(self.k):
                self.k -= 1
                if b[self.k] in "lsz":
                    self.k += 1
            elif self.m() == 1 and self.cvc(self.k):
                self.setto("e")
        del b[self.k + 1 :]

    def step1c(self) -> None:
        if self.ends("y") and self.vowel_in_stem():
            self.b[self.k] = "i"

    # (penultimate letter, [(suffix, replacement), ...]); first matching suffix wins.
    _STEP2 = {
        "a": [("ational", "ate"), ("tional", "tion")],
        "c": [("enci", "ence"), ("anci", "ance")],
        "e": [("izer", "ize")],
        "l": [("bli", "ble"), ("alli", "al"), ("entli", "ent"), ("eli", "e"), ("ousli", "ous")],
        "o": [("ization", "ize"), ("ation", "ate"), ("ator", "ate")],
        "s": [("alism", "al"), ("iveness", "ive"), ("fulness", "ful"), ("ousness", "ous")],
        "t": [("aliti", "al"), ("iviti", "ive"), ("biliti", "ble")],
        "g": [("logi", "log")],
    }
    _STEP3 = {
        "e": [("icate", "ic"), ("ative", ""), ("alize", "al")],
        "i": [("iciti", "ic")],
        "l": [("ical", "ic"), ("ful", "")],
        "s": [("ness", "")],
    }
    _STEP4 = {
        "a": ["al"],
        "c": ["ance", "ence"],
        "e": ["er"],
        "i": ["ic"],
        "l": ["able", "ible"],
        "n": ["ant", "ement", "ment", "ent"],
        "o": ["ion", "ou"],
        "s": ["ism"],
        "t": ["ate", "iti"],
        "u": ["ous"],
        "v": ["ive"],
        "z": ["ize"],
    }

    def _replace_first(self, table, key: str) -> None:
        for suffix, repl in table.get(key, ()):
            if self.ends(suffix):
                self.r(repl)
                return

    def step2(self) -> None:
        if self.k >= 1:
            self._replace_first(self._STEP2, self.b[self.k - 1])

    def step3(self) -> None:
        self._replace_first(self._STEP3, self.b[self.k])

    def step4(self) -> None:
        if self.k < 1:
            return
        for suffix in self._STEP4.get(self.b[self.k - 1], ()):
            if self.ends(suffix):
                if suffix == "ion" and not (self.j >= 0 and self.b[self.j] in "st"):
                    continue
                break
        else:
            return
        if self.m() > 1:
            self.k = self.j

    def step5(self) -> None:
        self.j = self.k
        if self.b[self.k] == "e":
            a = self.m()
            if a > 1 or (a == 1 and not self.cvc(self.k - 1)):
                self.k -= 1
        if self.b[self.k] == "l" and self.doublec(self.k) and self.m() > 1:
            self.k -= 1

    def run(self) -> str:
        if self.k <= 1:
            return "".join(self.b)
        self.step1ab()
        if self.k > 0:
            self.step1c()
            self.step2()
            self.step3()
            self.step4()
            self.step5()
        return "".join(self.b[: self.k + 1])


@lru_cache(maxsize=1 << 18)
def stem(word: str) -> str:
    """Stem one lowercase word."""
    return _Stemmer(word).run()
