import json
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from prosign.analysis import (
    MEASURES,
    WordRecord,
    correlation_grid,
    join_records,
    load_correlation_csv,
    load_records_csv,
    save_correlation_csv,
    save_records_csv,
    save_scatter_json,
    scatter_export,
    spearman_rho,
)
from prosign.errors import JoinError, ValidationError
from prosign.givenness import GivennessRecord
from prosign.prominence import WordProsody
from prosign.surprisal import WordSurprisal

from helpers import make_manifest


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------


def oracle_midranks(values):
    """Quadratic-time midranks: rank = count(smaller) + (count(equal)+1)/2."""
    out = []
    for v in values:
        smaller = sum(1 for u in values if u < v)
        equal = sum(1 for u in values if u == v)
        out.append(smaller + (equal + 1) / 2.0)
    return out


def oracle_pearson(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = math.sqrt(sum((a - mx) ** 2 for a in x))
    vy = math.sqrt(sum((b - my) ** 2 for b in y))
    if vx == 0 or vy == 0:
        return None
    return cov / (vx * vy)


def oracle_spearman(x, y):
    return oracle_pearson(oracle_midranks(x), oracle_midranks(y))


class TestSpearman:
    def test_monotone_increasing(self):
        assert spearman_rho([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)

    def test_monotone_decreasing(self):
        assert spearman_rho([1, 2, 3, 4], [8, 6, 4, 2]) == pytest.approx(-1.0)

    def test_tied_case_matches_oracle(self):
        x = [1, 2, 2, 3]
        y = [10, 20, 30, 40]
        assert spearman_rho(x, y) == pytest.approx(oracle_spearman(x, y), abs=1e-12)

    def test_zero_rank_variance_undefined(self):
        assert spearman_rho([1.0, 1.0, 1.0], [1, 2, 3]) is None

    def test_random_vectors_match_oracle(self):
        rng = random.Random(1234)
        for _ in range(300):
            n = rng.randint(3, 50)
            x = [rng.choice([rng.uniform(-5, 5), rng.randint(-3, 3)]) for _ in range(n)]
            y = [rng.choice([rng.uniform(-5, 5), rng.randint(-3, 3)]) for _ in range(n)]
            got = spearman_rho(x, y)
            want = oracle_spearman(x, y)
            if want is None:
                assert got is None
            else:
                assert got == pytest.approx(want, abs=1e-10)

    @settings(max_examples=100)
    @given(
        st.lists(st.floats(min_value=-100, max_value=100), min_size=3, max_size=30),
        st.data(),
    )
    def test_symmetry_and_bounds(self, x, data):
        y = data.draw(
            st.lists(
                st.floats(min_value=-100, max_value=100), min_size=len(x), max_size=len(x)
            )
        )
        a = spearman_rho(x, y)
        b = spearman_rho(y, x)
        if a is None:
            assert b is None
        else:
            assert a == pytest.approx(b, abs=1e-12)
            assert -1.0 <= a <= 1.0

    @settings(max_examples=60)
    @given(st.lists(st.integers(min_value=-50, max_value=50), min_size=4, max_size=25, unique=True))
    def test_invariant_under_monotone_transform(self, x):
        rng = random.Random(99)
        y = [rng.uniform(-10, 10) for _ in x]
        base = spearman_rho([float(v) for v in x], y)
        transformed = spearman_rho([math.exp(0.1 * v) + 3 * v for v in x], y)
        if base is not None:
            assert transformed == pytest.approx(base, abs=1e-10)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            spearman_rho([1, 2, 3], [1, 2])

    def test_too_short_rejected(self):
        with pytest.raises(ValidationError):
            spearman_rho([1, 2], [1, 2])


# ---------------------------------------------------------------------------
# Record / join machinery
# ---------------------------------------------------------------------------

MANIFEST = make_manifest(
    [("C-0001", "the quick brown fox jumps"), ("C-0002", "over the lazy dog today")],
    stopwords=frozenset({"the", "over"}),
)


def make_tables(n_segments=2, drop_prosody=()):
    surprisal_rows = []
    prosody_rows = []
    givenness_rows = []
    rng = random.Random(0)
    for seg in MANIFEST.segments:
        for idx, word in enumerate(seg.text.split()):
            for variant in ("sup_0", "sup_5"):
                surprisal_rows.append(
                    WordSurprisal(seg.id, idx, word, variant, "m", rng.uniform(1, 20), 1)
                )
            if (seg.id, idx) not in drop_prosody:
                prosody_rows.append(
                    WordProsody(
                        segment_id=seg.id, word_index=idx, word=word,
                        prominence=rng.uniform(-1, 3), duration_s=rng.uniform(0.1, 0.5),
                        f0_mean=rng.gauss(0, 1), f0_sd=abs(rng.gauss(0, 1)),
                        intensity_mean=rng.gauss(0, 1), intensity_sd=abs(rng.gauss(0, 1)),
                    )
                )
            givenness_rows.append(
                GivennessRecord(seg.id, idx, word.lower(), None if idx % 2 else 1,
                                word.lower() not in MANIFEST.stopword_lexicon)
            )
    return surprisal_rows, prosody_rows, givenness_rows


class TestJoin:
    def test_aligned_tables_zero_loss(self):
        s, p, g = make_tables()
        records, report = join_records(s, p, g, MANIFEST)
        assert report.surprisal_dropped == 0
        assert report.prosody_dropped == 0
        assert report.joined == 10
        assert all(r.givenness is not None for r in records)

    def test_missing_prosody_row_drops_record(self):
        s, p, g = make_tables(drop_prosody={("C-0001", 2)})
        records, report = join_records(s, p, g, MANIFEST, loss_threshold=0.5)
        assert report.joined == 9
        assert report.surprisal_dropped == 1

    def test_loss_over_threshold_rejected(self):
        s, p, g = make_tables(drop_prosody={("C-0001", i) for i in range(5)})
        with pytest.raises(JoinError):
            join_records(s, p, g, MANIFEST, loss_threshold=0.05)

    def test_duplicate_key_rejected(self):
        s, p, g = make_tables()
        with pytest.raises(ValidationError, match="duplicate"):
            join_records(s + [s[0]], p, g, MANIFEST)
        with pytest.raises(ValidationError, match="duplicate"):
            join_records(s, p + [p[0]], g, MANIFEST)

    def test_unknown_segment_rejected(self):
        s, p, g = make_tables()
        bad = WordSurprisal("NOPE-0001", 0, "x", "sup_0", "m", 1.0, 1)
        with pytest.raises(LookupError):
            join_records(s + [bad], p, g, MANIFEST, loss_threshold=1.0)

    def test_out_of_range_word_index_rejected(self):
        s, p, g = make_tables()
        bad = WordSurprisal("C-0001", 99, "x", "sup_0", "m", 1.0, 1)
        with pytest.raises(ValidationError, match="out of range"):
            join_records(s + [bad], p, g, MANIFEST, loss_threshold=1.0)

    def test_stopword_flag_set_from_manifest(self):
        s, p, g = make_tables()
        records, _ = join_records(s, p, g, MANIFEST)
        flags = {(r.segment_id, r.word): r.is_stopword for r in records}
        assert flags[("C-0001", "the")] is True
        assert flags[("C-0001", "fox")] is False


def planted_records(n=50, seed=0):
    """Stop-word group has a strictly monotone surprisal->prominence link."""
    rng = random.Random(seed)
    records = []
    for i in range(n):
        is_stop = i % 2 == 0
        x = float(i)
        prominence = x if is_stop else rng.uniform(0, n)
        records.append(
            WordRecord(
                segment_id="C-0001", word_index=i, word="w", is_stopword=is_stop,
                surprisal={"m:sup_5": x, "self": prominence},
                prosody=WordProsody(
                    segment_id="C-0001", word_index=i, word="w",
                    prominence=prominence, duration_s=0.2, f0_mean=0.0, f0_sd=1.0,
                    intensity_mean=0.0, intensity_sd=1.0,
                ),
            )
        )
    return records


class TestCorrelationGrid:
    def test_planted_stop_relationship(self):
        records = planted_records()
        report = correlation_grid(records, variants=["m:sup_5"], measures=["prominence"])
        stop = report.cell("m:sup_5", "prominence", "stop")
        content = report.cell("m:sup_5", "prominence", "content")
        assert stop.rho == pytest.approx(1.0, abs=1e-12)
        assert content.rho < stop.rho
        # independent oracle on the stop subset
        xs = [r.surprisal["m:sup_5"] for r in records if r.is_stopword]
        ys = [r.prosody.prominence for r in records if r.is_stopword]
        assert stop.rho == pytest.approx(oracle_spearman(xs, ys), abs=1e-10)

    def test_self_correlation_is_one(self):
        records = planted_records()
        report = correlation_grid(records, variants=["self"], measures=["prominence"])
        assert report.cell("self", "prominence", "all").rho == pytest.approx(1.0, abs=1e-12)

    def test_rank_invariance_under_monotone_transform(self):
        records = planted_records()
        transformed = [
            WordRecord(
                segment_id=r.segment_id, word_index=r.word_index, word=r.word,
                is_stopword=r.is_stopword,
                surprisal={k: math.exp(0.05 * v) for k, v in r.surprisal.items()},
                prosody=r.prosody, givenness=r.givenness,
            )
            for r in records
        ]
        a = correlation_grid(records, variants=["m:sup_5"], measures=["prominence"])
        b = correlation_grid(transformed, variants=["m:sup_5"], measures=["prominence"])
        for cell_a, cell_b in zip(a.entries, b.entries):
            assert cell_a.rho == pytest.approx(cell_b.rho, abs=1e-10)

    def test_permutation_invariance(self):
        records = planted_records()
        shuffled = records[::-1]
        a = correlation_grid(records)
        b = correlation_grid(shuffled)
        assert a == b

    def test_small_group_undefined(self):
        records = planted_records(4)  # 2 stop + 2 content
        report = correlation_grid(records, variants=["m:sup_5"], measures=["prominence"])
        assert report.cell("m:sup_5", "prominence", "stop").rho is None
        assert report.cell("m:sup_5", "prominence", "stop").n == 2

    def test_default_grid_covers_all_measures(self):
        records = planted_records()
        report = correlation_grid(records)
        assert len(report.entries) == 2 * len(MEASURES) * 3


class TestScatter:
    def test_sqrt_transform(self):
        records = planted_records(10)
        data = scatter_export(records, "m:sup_5", "prominence")
        # value 4 with no shift plots at 2
        assert data["meta"]["x_shift"] == 0.0
        stop_points = next(g for g in data["groups"] if g["group"] == "stop")["points"]
        xs = sorted(p[0] for p in stop_points)
        assert any(abs(x - 2.0) < 1e-12 for x in xs)  # surprisal 4 is a stop row

    def test_point_count_and_histogram_sums(self):
        records = planted_records(60)
        data = scatter_export(records, "m:sup_5", "prominence")
        total_points = sum(len(g["points"]) for g in data["groups"])
        assert total_points == 60
        for g in data["groups"]:
            assert sum(g["hist_x"]) == len(g["points"])
            assert sum(g["hist_y"]) == len(g["points"])
            assert len(g["hist_x"]) == 64

    def test_negative_values_shifted(self):
        records = planted_records(10)
        neg = [
            WordRecord(
                segment_id=r.segment_id, word_index=r.word_index, word=r.word,
                is_stopword=r.is_stopword, surprisal=r.surprisal,
                prosody=WordProsody(
                    segment_id=r.segment_id, word_index=r.word_index, word=r.word,
                    prominence=r.prosody.prominence - 5.0, duration_s=0.2,
                    f0_mean=0.0, f0_sd=1.0, intensity_mean=0.0, intensity_sd=1.0,
                ),
            )
            for r in records
        ]
        data = scatter_export(neg, "m:sup_5", "prominence")
        assert data["meta"]["y_shift"] < 0
        for g in data["groups"]:
            assert all(p[1] >= 0 for p in g["points"])

    def test_json_round_trip(self, tmp_path):
        records = planted_records(10)
        data = scatter_export(records, "m:sup_5", "prominence")
        path = tmp_path / "scatter.json"
        save_scatter_json(data, path)
        assert json.loads(path.read_text()) == data


def test_records_csv_round_trip(tmp_path):
    s, p, g = make_tables()
    records, _ = join_records(s, p, g, MANIFEST)
    path = tmp_path / "records.csv"
    save_records_csv(records, path)
    again = load_records_csv(path)
    assert again == records


def test_correlation_csv_round_trip(tmp_path):
    records = planted_records(8)
    report = correlation_grid(records)
    path = tmp_path / "correlations.csv"
    save_correlation_csv(report, path)
    assert load_correlation_csv(path) == report
