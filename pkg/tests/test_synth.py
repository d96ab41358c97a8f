import io
import math

import pytest

from offlang.corpus import parse_labeled_tsv, write_olid_tsv
from offlang.metrics import confusion, metrics
from offlang.synth import SynthError, SynthSpec, generate


class TestGenerate:
    def test_danish_shaped(self):
        spec = SynthSpec(n_samples=3000, positive_ratio=0.128, seed=7)
        d = generate(spec)
        assert len(d) == 3000
        ratio = sum(s.label for s in d.samples) / len(d)
        assert abs(ratio - 0.128) <= 1.0 / math.sqrt(3000)
        assert abs(100 * ratio - 12.8) <= 0.05  # exact count construction

    def test_deterministic(self):
        spec = SynthSpec(n_samples=200, positive_ratio=0.3, seed=11)
        a, b = generate(spec), generate(spec)
        assert [(s.id, s.text, s.label) for s in a.samples] == [
            (s.id, s.text, s.label) for s in b.samples
        ]
        c = generate(SynthSpec(n_samples=200, positive_ratio=0.3, seed=12))
        assert [s.text for s in a.samples] != [s.text for s in c.samples]

    def test_noiseless_marker_presence_separates(self):
        spec = SynthSpec(n_samples=400, positive_ratio=0.25, noise_rate=0.0, seed=3)
        d = generate(spec)
        markers = set(spec.offensive_marker_words)
        preds = [1 if any(t in markers for t in s.text.split()) else 0 for s in d.samples]
        m = metrics(confusion(preds, d.labels()))
        assert m.f1_positive == 1.0

    def test_noisy_construction_probabilities(self):
        spec = SynthSpec(n_samples=4000, positive_ratio=0.3, noise_rate=0.2, seed=5)
        d = generate(spec)
        markers = set(spec.offensive_marker_words)
        has = [any(t in markers for t in s.text.split()) for s in d.samples]
        y = d.labels()
        pos_with = sum(1 for h, l in zip(has, y) if l == 1 and h) / sum(y)
        neg_without = sum(1 for h, l in zip(has, y) if l == 0 and not h) / (len(y) - sum(y))
        assert abs(pos_with - 0.8) < 0.05
        assert abs(neg_without - 0.8) < 0.05

    def test_ids_unique_and_all_labeled(self):
        d = generate(SynthSpec(n_samples=150, positive_ratio=0.4, seed=1))
        assert len({s.id for s in d.samples}) == 150
        assert all(s.label in (0, 1) for s in d.samples)

    def test_preprocessing_surface_present(self):
        d = generate(SynthSpec(n_samples=500, positive_ratio=0.2, seed=2))
        texts = " ".join(s.text for s in d.samples)
        assert "#" in texts  # hashtags injected
        assert any(ord(c) > 0x2000 for c in texts)  # emoji injected

    def test_invariants(self):
        with pytest.raises(SynthError):
            SynthSpec(n_samples=5, positive_ratio=0.5)
        with pytest.raises(SynthError):
            SynthSpec(n_samples=100, positive_ratio=0.0)
        with pytest.raises(SynthError):
            SynthSpec(n_samples=100, positive_ratio=0.5, noise_rate=1.0)
        with pytest.raises(SynthError):
            SynthSpec(
                n_samples=100, positive_ratio=0.5,
                offensive_marker_words=("x",), benign_vocabulary=("x", "y"),
            )

    def test_tsv_emission_round_trip(self):
        d = generate(SynthSpec(n_samples=100, positive_ratio=0.35, seed=9), name="syn")
        buf = io.BytesIO()
        write_olid_tsv(d, buf)
        back = parse_labeled_tsv(buf.getvalue(), "olid_labeled", name="syn")
        assert [(s.id, s.text, s.label) for s in back.samples] == [
            (s.id, s.text, s.label) for s in d.samples
        ]
