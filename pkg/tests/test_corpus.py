import json

import pytest

from reviewscope.corpus import (
    AI_GENERATED,
    HUMAN,
    CorpusError,
    Dataset,
    Review,
    class_counts,
    dataset_from_csv_text,
    dataset_to_csv_text,
    load_dataset_csv,
    parse_peerread_file,
    stratified_split,
    write_dataset_csv,
)

LONG = "x" * 60


def make_review(i, label=HUMAN, text=None):
    return Review(id=f"r{i}", text=text or f"{LONG} review number {i}", label=label)


def make_dataset(n_human, n_ai):
    reviews = [make_review(i, HUMAN) for i in range(n_human)]
    reviews += [make_review(n_human + i, AI_GENERATED) for i in range(n_ai)]
    return Dataset(reviews=tuple(reviews))


def peerread_bytes(comments_list, paper_id="1234"):
    return json.dumps(
        {"id": paper_id, "reviews": [{"comments": c} for c in comments_list]}
    ).encode()


class TestParsePeerread:
    def test_length_filter_drops_short_reviews(self):
        raw = peerread_bytes([LONG + " one", "too short", LONG + " two"])
        reviews = parse_peerread_file(raw)
        assert len(reviews) == 2
        assert [r.text for r in reviews] == [LONG + " one", LONG + " two"]

    def test_empty_reviews_array(self):
        assert parse_peerread_file(peerread_bytes([])) == []

    def test_labels_and_metadata(self):
        reviews = parse_peerread_file(peerread_bytes([LONG]), source="PeerRead-ACL", id_prefix="acl-")
        assert reviews[0].label == HUMAN
        assert reviews[0].source == "PeerRead-ACL"
        assert reviews[0].id == "acl-0"
        assert reviews[0].paper_id == "1234"

    def test_malformed_json_names_byte_offset(self):
        with pytest.raises(CorpusError, match=r"byte offset \d+"):
            parse_peerread_file(b'{"reviews": [}')

    def test_missing_reviews_array(self):
        with pytest.raises(CorpusError, match="reviews"):
            parse_peerread_file(b'{"other": 1}')


class TestCsvRoundTrip:
    def test_empty_dataset(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_dataset_csv(Dataset(reviews=()), path)
        assert path.read_text() == '"id","text","label","source","paper_id"\n'
        assert len(load_dataset_csv(path)) == 0

    def test_two_row_round_trip(self, tmp_path):
        ds = Dataset(
            reviews=(
                Review(id="a", text=LONG + ' with "quotes", commas\nand newlines', label=0),
                Review(id="b", text=LONG + " ai review", label=1, source="GenReviewNeutral",
                       paper_id="p9"),
            )
        )
        path = tmp_path / "ds.csv"
        write_dataset_csv(ds, path)
        assert load_dataset_csv(path).reviews == ds.reviews

    def test_round_trip_text_form(self):
        ds = make_dataset(3, 2)
        assert dataset_from_csv_text(dataset_to_csv_text(ds)).reviews == ds.reviews

    def test_unknown_label_reports_line(self):
        text = '"id","text","label","source","paper_id"\n"a","' + LONG + '","7","External",""\n'
        with pytest.raises(CorpusError, match="line 2.*unknown label"):
            dataset_from_csv_text(text)

    def test_duplicate_id_rejected(self):
        row = f'"a","{LONG}","0","External",""\n'
        text = '"id","text","label","source","paper_id"\n' + row + row
        with pytest.raises(CorpusError, match="duplicate id"):
            dataset_from_csv_text(text)

    def test_unlabeled_round_trips_as_none(self):
        ds = Dataset(reviews=(Review(id="a", text=LONG, label=None),))
        assert dataset_from_csv_text(dataset_to_csv_text(ds)).reviews[0].label is None


class TestReviewValidation:
    def test_short_text_rejected(self):
        with pytest.raises(CorpusError, match="minimum"):
            Review(id="a", text="short", label=0)

    def test_unicode_counts_scalars_not_bytes(self):
        # 50 two-byte characters pass the 50-character floor
        Review(id="a", text="é" * 50, label=0)

    def test_duplicate_ids_in_dataset(self):
        r = make_review(1)
        with pytest.raises(CorpusError, match="duplicate"):
            Dataset(reviews=(r, r))


class TestClassCounts:
    def test_fixture_counts(self):
        assert class_counts(make_dataset(3, 1)) == (3, 1)

    def test_empty(self):
        assert class_counts(Dataset(reviews=())) == (0, 0)

    def test_unlabeled_errors(self):
        ds = Dataset(reviews=(Review(id="a", text=LONG, label=None),))
        with pytest.raises(CorpusError, match="unlabeled"):
            class_counts(ds)

    def test_corpus_scale_counts(self):
        assert class_counts(make_dataset(5772, 2000)) == (5772, 2000)


class TestStratifiedSplit:
    def test_balanced_ten_stays_balanced(self):
        train, test = stratified_split(make_dataset(5, 5), 0.5, seed=1)
        # round-half-up: 0.5 * 5 = 2.5 -> 3 of each class in test
        assert class_counts(test) == (3, 3)
        assert class_counts(train) == (2, 2)

    def test_corpus_scale_marginals(self):
        # 30% of 5,772/2,000 must give the 1,732 + 600 = 2,332 test set
        train, test = stratified_split(make_dataset(5772, 2000), 0.30, seed=7)
        assert class_counts(test) == (1732, 600)
        assert len(test) == 2332
        assert class_counts(train) == (4040, 1400)

    def test_deterministic_and_disjoint(self):
        ds = make_dataset(20, 10)
        a_train, a_test = stratified_split(ds, 0.3, seed=42)
        b_train, b_test = stratified_split(ds, 0.3, seed=42)
        assert [r.id for r in a_train] == [r.id for r in b_train]
        assert [r.id for r in a_test] == [r.id for r in b_test]
        ids = {r.id for r in a_train} | {r.id for r in a_test}
        assert len(ids) == len(ds)

    def test_stratification_bound(self):
        ds = make_dataset(37, 13)
        _, test = stratified_split(ds, 0.25, seed=3)
        n_h, n_a = class_counts(test)
        for observed, total in ((n_h, 37), (n_a, 13)):
            corpus_fraction = total / 50
            assert abs(observed / len(test) - corpus_fraction) <= 1 / len(test) + 1e-12

    def test_tiny_class_rejected(self):
        ds = Dataset(reviews=(make_review(0, HUMAN), make_review(1, HUMAN), make_review(2, AI_GENERATED)))
        with pytest.raises(CorpusError, match="at least 2"):
            stratified_split(ds, 0.5, seed=0)

    def test_unlabeled_rejected(self):
        ds = Dataset(reviews=(Review(id="a", text=LONG),) + make_dataset(2, 2).reviews)
        with pytest.raises(CorpusError, match="unlabeled"):
            stratified_split(ds, 0.5, seed=0)


class TestShuffle:
    def test_permutation_preserves_multiset(self):
        ds = make_dataset(10, 5)
        shuffled = ds.shuffled(9)
        assert sorted(r.id for r in shuffled) == sorted(r.id for r in ds)

    def test_deterministic(self):
        ds = make_dataset(10, 5)
        assert ds.shuffled(9).reviews == ds.shuffled(9).reviews
        assert ds.shuffled(9).reviews != ds.shuffled(10).reviews
