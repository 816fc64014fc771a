"""Tests for the string search backends.

Brute force is the oracle: every other backend must report exactly the
same (pattern id, offset) list on every input.
"""

import random

import pytest

from app.errors import InvalidArgumentError
from app.search import (
    Backend,
    CountingText,
    Occurrence,
    Pattern,
    ac_build,
    ac_find_all,
    bm_build,
    bm_find_all,
    brute_force_find_all,
    build_matcher,
    kmp_build,
    kmp_find_all,
)


def offsets(occurrences):
    return [occ.offset for occ in occurrences]


def oracle(patterns, text):
    found = []
    for pattern in patterns:
        found.extend(brute_force_find_all(pattern, text))
    found.sort(key=lambda occ: (occ.offset, occ.pattern_id))
    return found


KEYWORDS = [Pattern(word, word.encode()) for word in ("he", "she", "his", "hers")]


class TestPattern:
    def test_empty_pattern_rejected(self):
        with pytest.raises(InvalidArgumentError):
            Pattern("empty", b"")


class TestBruteForce:
    """Test the oracle itself on hand-enumerable inputs."""

    def test_overlapping_self_similar(self):
        assert offsets(brute_force_find_all(Pattern("a", b"aaa"), b"aaaaa")) == [0, 1, 2]

    def test_empty_text(self):
        assert brute_force_find_all(Pattern("he", b"he"), b"") == []

    def test_single_match(self):
        assert offsets(brute_force_find_all(Pattern("he", b"he"), b"ushers")) == [2]

    def test_pattern_longer_than_text(self):
        assert brute_force_find_all(Pattern("long", b"abcdef"), b"abc") == []


class TestKmp:
    """Test the prefix-function table and the linear search."""

    @pytest.mark.parametrize(
        "data, expected",
        [
            (b"aaaa", (0, 1, 2, 3)),
            (b"abcd", (0, 0, 0, 0)),
            (b"hers", (0, 0, 0, 0)),
            (b"abab", (0, 0, 1, 2)),
            (b"aabaaab", (0, 1, 0, 1, 2, 2, 3)),
        ],
    )
    def test_prefix_function(self, data, expected):
        assert kmp_build(Pattern("p", data)).prefix_function == expected

    def test_find_inside_word(self):
        table = kmp_build(Pattern("she", b"she"))
        assert kmp_find_all(table, b"ushers") == [Occurrence("she", 1)]

    def test_absent_byte(self):
        assert kmp_find_all(kmp_build(Pattern("x", b"x")), b"ushers") == []

    def test_pattern_equals_text(self):
        assert offsets(kmp_find_all(kmp_build(Pattern("u", b"ushers")), b"ushers")) == [0]

    def test_overlapping_matches(self):
        table = kmp_build(Pattern("aba", b"aba"))
        assert offsets(kmp_find_all(table, b"ababababa")) == [0, 2, 4, 6]

    def test_reads_each_text_byte_once(self):
        text = CountingText(random.Random(3).randbytes(4096))
        kmp_find_all(kmp_build(Pattern("p", b"\x00\x01\x00")), text)
        assert text.reads == 4096


class TestBoyerMoore:
    """Test the shift tables and the right-to-left search."""

    def test_bad_character_shift(self):
        tables = bm_build(Pattern("abc", b"abc"))

        assert tables.bad_character_shift[ord("a")] == 2
        assert tables.bad_character_shift[ord("b")] == 1
        assert tables.shift_for(ord("z")) == 3

    def test_final_byte_excluded_from_bad_character_map(self):
        tables = bm_build(Pattern("abc", b"abc"))
        assert ord("c") not in tables.bad_character_shift
        assert tables.shift_for(ord("c")) == 3

    def test_absent_byte_shifts_full_length(self):
        assert bm_build(Pattern("aaa", b"aaa")).shift_for(ord("z")) == 3

    def test_good_suffix_table_has_one_entry_per_position(self):
        tables = bm_build(Pattern("ex", b"EXAMPLE"))
        assert len(tables.good_suffix_shift) == 7
        assert tables.good_suffix_shift[6] == 1

    def test_good_suffix_full_match_shift_is_period(self):
        assert bm_build(Pattern("abab", b"abab")).good_suffix_shift[0] == 2
        assert bm_build(Pattern("aaa", b"aaa")).good_suffix_shift[0] == 1
        assert bm_build(Pattern("abc", b"abc")).good_suffix_shift[0] == 3

    def test_classic_example(self):
        tables = bm_build(Pattern("ex", b"EXAMPLE"))
        assert offsets(bm_find_all(tables, b"HERE IS A SIMPLE EXAMPLE")) == [17]

    def test_absent_pattern_in_zero_image(self):
        tables = bm_build(Pattern("jpeg/footer", b"\xff\xd9"))
        assert bm_find_all(tables, bytes(4096)) == []

    def test_overlap_reported(self):
        assert offsets(bm_find_all(bm_build(Pattern("aa", b"aa")), b"aaa")) == [0, 1]

    def test_sublinear_on_random_megabyte(self):
        """A long pattern over random bytes skips most of the text."""
        n = 1024 * 1024
        text = CountingText(random.Random(11).randbytes(n))
        bm_find_all(bm_build(Pattern("oct", b"\xd0\xcf\x11\xe0\xa1\xb1\x1a\xe1")), text)

        assert text.reads < n // 2


class TestAhoCorasick:
    """Test automaton construction and the single-pass search."""

    def test_keyword_machine_has_ten_states(self):
        assert ac_build(KEYWORDS).state_count == 10

    def test_keyword_paths(self):
        automaton = ac_build(KEYWORDS)

        assert automaton.walk(b"he") == 2
        assert automaton.walk(b"she") == 5
        assert automaton.walk(b"his") == 7
        assert automaton.walk(b"hers") == 9
        assert automaton.walk(b"x") is None

    def test_output_states(self):
        automaton = ac_build(KEYWORDS)
        with_output = {state for state, out in enumerate(automaton.output_fn) if out}

        assert with_output == {2, 5, 7, 9}
        assert automaton.output_fn[2] == {"he"}
        assert automaton.output_fn[7] == {"his"}
        assert automaton.output_fn[9] == {"hers"}

    def test_failure_merges_output_into_she_state(self):
        automaton = ac_build(KEYWORDS)
        assert automaton.output_fn[5] == {"she", "he"}

    def test_failure_links(self):
        automaton = ac_build(KEYWORDS)
        # 4 = "sh" -> "h", 5 = "she" -> "he", 7 = "his" -> "s", 9 = "hers" -> "s"
        assert automaton.failure_fn[4] == 1
        assert automaton.failure_fn[5] == 2
        assert automaton.failure_fn[7] == 3
        assert automaton.failure_fn[9] == 3

    def test_single_pattern(self):
        automaton = ac_build([Pattern("a", b"a")])

        assert automaton.state_count == 2
        assert automaton.output_fn[1] == {"a"}

    def test_ushers(self):
        found = ac_find_all(ac_build(KEYWORDS), b"ushers")

        assert set(found) == {Occurrence("she", 1), Occurrence("he", 2), Occurrence("hers", 2)}
        assert found == [Occurrence("she", 1), Occurrence("he", 2), Occurrence("hers", 2)]

    def test_empty_text(self):
        assert ac_find_all(ac_build(KEYWORDS), b"") == []

    def test_overlapping_via_failure(self):
        assert offsets(ac_find_all(ac_build([Pattern("aa", b"aa")]), b"aaaa")) == [0, 1, 2]

    def test_empty_pattern_list_rejected(self):
        with pytest.raises(InvalidArgumentError):
            ac_build([])

    def test_id_reused_for_different_lengths_rejected(self):
        with pytest.raises(InvalidArgumentError):
            ac_build([Pattern("x", b"ab"), Pattern("x", b"abc")])

    @pytest.mark.parametrize("pattern_count", [1, 8])
    def test_single_pass_over_megabyte(self, pattern_count):
        """Text bytes read equals text length regardless of pattern count."""
        n = 1024 * 1024
        rng = random.Random(pattern_count)
        patterns = [Pattern(f"p{i}", rng.randbytes(4)) for i in range(pattern_count)]
        text = CountingText(rng.randbytes(n))

        ac_find_all(ac_build(patterns), text)

        assert text.reads == 1048576


class TestOracleEquivalence:
    """Seeded random instances: every backend agrees with brute force."""

    @pytest.mark.parametrize("backend", [Backend.KMP, Backend.BM, Backend.AC])
    def test_matches_brute_force(self, backend):
        rng = random.Random(20240518)
        for _ in range(300):
            alphabet = rng.choice([b"ab", b"abc", bytes(range(4))])
            text = bytes(rng.choice(alphabet) for _ in range(rng.randint(0, 120)))
            patterns = [
                Pattern(f"p{i}", bytes(rng.choice(alphabet) for _ in range(rng.randint(1, 5))))
                for i in range(rng.randint(1, 4))
            ]

            expected = oracle(patterns, text)

            assert build_matcher(backend, patterns).find_all(text) == expected, (patterns, text)

    def test_thousand_instances_binary_and_full_alphabets(self):
        """Texts up to 4 KiB, 1-8 patterns of 1-16 bytes, half of them cut from the text."""
        rng = random.Random(1000)
        for _ in range(1000):
            if rng.random() < 0.5:
                text = bytes(rng.choice(b"\x00\x01") for _ in range(rng.randint(0, 4096)))
            else:
                text = rng.randbytes(rng.randint(0, 4096))
            patterns = []
            for i in range(rng.randint(1, 8)):
                length = rng.randint(1, 16)
                if text and length <= len(text) and rng.random() < 0.5:
                    start = rng.randint(0, len(text) - length)
                    data = text[start : start + length]
                else:
                    data = rng.randbytes(length)
                patterns.append(Pattern(f"p{i}", data))

            expected = oracle(patterns, text)

            for backend in (Backend.KMP, Backend.BM, Backend.AC):
                assert build_matcher(backend, patterns).find_all(text) == expected, (backend, patterns)

    def test_same_bytes_under_two_ids(self):
        patterns = [Pattern("first", b"ab"), Pattern("second", b"ab")]
        text = b"xabab"
        for backend in Backend:
            assert build_matcher(backend, patterns).find_all(text) == oracle(patterns, text)

    def test_backend_by_name(self):
        assert build_matcher("bm", KEYWORDS).find_all(b"ushers") == oracle(KEYWORDS, b"ushers")

    def test_matcher_requires_patterns(self):
        with pytest.raises(InvalidArgumentError):
            build_matcher(Backend.KMP, [])
