import json
import time

import pytest

from absaug.balancer import balance, merge_augmented
from absaug.config import PipelineConfig, manifest_view
from absaug.corpus import Dataset, Instance, Polarity, label_counts
from absaug.errors import DataError
from absaug.exporter import (
    export_manifest,
    export_sft,
    validate_preference_jsonl,
    write_manifest,
    write_preference_jsonl,
    write_sft_jsonl,
)
from absaug.llm_gateway import PREDICTION_INSTRUCTION
from absaug.preference_builder import PreferencePair

from conftest import make_dataset

POS, NEU, NEG = Polarity.POSITIVE, Polarity.NEUTRAL, Polarity.NEGATIVE


def echo_augmentation(base: Dataset) -> Dataset:
    return Dataset(
        split=base.split,
        name=base.name,
        instances=tuple(
            Instance(
                sentence=f"{i.sentence} again",
                aspect=i.aspect,
                label=i.label,
                source_id=i.source_id,
                origin="augmented",
            )
            for i in base.instances
        ),
    )


class TestExportSft:
    def test_single_record_contains_instruction(self):
        d = make_dataset({POS: 1})
        (record,) = export_sft(d)
        assert PREDICTION_INSTRUCTION in record["prompt"]
        assert record["completion"] == "positive"
        assert record["origin"] == "original"

    def test_empty_dataset_empty_stream(self):
        empty = Dataset(split="train", name="e", instances=())
        assert export_sft(empty) == []
        assert write_sft_jsonl(empty) == b""

    def test_lap14_balanced_merged_has_5964_records(self):
        base = balance(make_dataset({POS: 994, NEU: 464, NEG: 870}), rng_seed=0)
        merged = merge_augmented(base, echo_augmentation(base), "balanced")
        records = export_sft(merged)
        assert len(records) == 5964

    def test_label_distribution_matches_dataset(self):
        d = make_dataset({POS: 3, NEU: 2, NEG: 4})
        records = export_sft(d)
        assert len(records) == len(d)
        counts = label_counts(d)
        for p in Polarity:
            assert sum(1 for r in records if r["completion"] == p.value) == counts[p]

    def test_jsonl_bytes_are_lf_terminated_utf8(self):
        d = make_dataset({POS: 2})
        data = write_sft_jsonl(d)
        assert data.endswith(b"\n")
        assert b"\r" not in data
        assert len(data.decode("utf-8").splitlines()) == 2


def pair(sid="a", branch="normal"):
    return PreferencePair(
        source_id=sid, prompt="PROMPT", chosen="good text", rejected="bad text", branch=branch
    )


class TestPreferenceJsonl:
    def test_write_then_validate(self):
        data = write_preference_jsonl([pair("a"), pair("b", "chosen_empty")])
        records = validate_preference_jsonl(data)
        assert [r["source_id"] for r in records] == ["a", "b"]
        assert list(records[0]) == ["prompt", "chosen", "rejected", "source_id", "branch"]

    def test_missing_key_rejected(self):
        bad = b'{"prompt":"p","chosen":"c","rejected":"r","branch":"normal"}\n'
        with pytest.raises(DataError, match="do not match schema"):
            validate_preference_jsonl(bad)

    def test_unknown_branch_rejected(self):
        bad = (
            b'{"prompt":"p","chosen":"c","rejected":"r","source_id":"s","branch":"sideways"}\n'
        )
        with pytest.raises(DataError, match="unknown branch"):
            validate_preference_jsonl(bad)

    def test_empty_prompt_rejected(self):
        bad = b'{"prompt":"","chosen":"c","rejected":"r","source_id":"s","branch":"normal"}\n'
        with pytest.raises(DataError, match="empty prompt"):
            validate_preference_jsonl(bad)

    def test_empty_pair_list_is_empty_file(self):
        assert write_preference_jsonl([]) == b""


class TestManifest:
    def args(self, cfg):
        return dict(
            config=manifest_view(cfg),
            seeds={"master": cfg.seed},
            model_ids={"augmentation": "mock", "reward": "mock"},
            dataset_hashes={"input": "abc"},
        )

    def test_defaults_are_echoed(self):
        cfg = PipelineConfig()
        manifest = export_manifest(**self.args(cfg))
        assert manifest["lda_K"] == 10
        assert manifest["n_candidates"] == 5
        assert manifest["temperature"] == 1.0
        assert manifest["top_k"] == 50
        assert manifest["predict_temperature"] == 0.0
        assert manifest["seeds"] == {"master": 0}

    def test_identical_minus_timestamp(self):
        cfg = PipelineConfig()
        first = export_manifest(**self.args(cfg))
        time.sleep(0.002)
        second = export_manifest(**self.args(cfg))
        assert first.pop("created_at") != second.pop("created_at")
        assert first == second

    def test_seed_change_shows_only_in_seeds(self):
        base = export_manifest(**self.args(PipelineConfig()))
        changed = export_manifest(**self.args(PipelineConfig(seed=99)))
        base.pop("created_at")
        changed.pop("created_at")
        diff = {k for k in base if base[k] != changed[k]}
        assert diff == {"seeds"}

    def test_manifest_bytes_parse_back(self):
        manifest = export_manifest(**self.args(PipelineConfig()))
        assert json.loads(write_manifest(manifest)) == manifest
