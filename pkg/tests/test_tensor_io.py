"""Tests for tensor file parsing and serialization."""

import json

import pytest

from r1tc.errors import TensorFormatError
from r1tc.methods.higher_order import Order4Result
from r1tc.tensors.models import STATUS_COMPLETED, CompletionResult, HigherTensor, PartialTensor
from r1tc.tensors.tensor_io import (
    load_tensor_file,
    parse_higher_tensor,
    parse_tensor,
    result_to_json,
    serialize_higher_tensor,
    serialize_tensor,
)


class TestParseTensor:
    def test_example_file(self, strong_tensor):
        assert strong_tensor.dims == (3, 3, 3)
        assert strong_tensor.size == 8
        assert strong_tensor.entries[(0, 2, 1)] == 1.0

    def test_comments_and_blank_lines(self):
        tensor = parse_tensor("# header\n\ndims 2 2 2\n  # entry\n1 1 1 0.5\n")
        assert tensor.entries == {(0, 0, 0): 0.5}

    def test_symmetric_header_closes_entries(self):
        tensor = parse_tensor("dims 2 2 2 symmetric\n1 1 2 3.0\n")
        assert tensor.symmetric
        assert tensor.size == 3
        assert tensor.entries[(1, 0, 0)] == 3.0

    def test_symmetric_flag_override(self):
        assert parse_tensor("dims 2 2 2\n1 2 2 1.0\n", symmetric=True).size == 3

    def test_missing_header(self):
        with pytest.raises(TensorFormatError, match="header"):
            parse_tensor("1 1 1 1.0\n")

    def test_bad_dimension(self):
        with pytest.raises(TensorFormatError, match="line 1"):
            parse_tensor("dims 2 0 2\n")

    def test_index_out_of_range(self):
        with pytest.raises(TensorFormatError, match="out of range"):
            parse_tensor("dims 2 2 2\n3 1 1 1.0\n")

    def test_wrong_field_count(self):
        with pytest.raises(TensorFormatError, match="line 2"):
            parse_tensor("dims 2 2 2\n1 1 1\n")

    def test_conflicting_duplicate(self):
        with pytest.raises(TensorFormatError, match="conflicting"):
            parse_tensor("dims 2 2 2\n1 1 1 1.0\n1 1 1 2.0\n")

    def test_consistent_duplicate(self):
        assert parse_tensor("dims 2 2 2\n1 1 1 1.0\n1 1 1 1.0\n").size == 1

    def test_non_finite_value(self):
        with pytest.raises(TensorFormatError, match="non-finite"):
            parse_tensor("dims 2 2 2\n1 1 1 inf\n")

    def test_symmetry_violation(self):
        with pytest.raises(TensorFormatError, match="symmetry"):
            parse_tensor("dims 2 2 2 symmetric\n1 1 2 1.0\n2 1 1 2.0\n")

    def test_symmetric_needs_equal_dims(self):
        with pytest.raises(TensorFormatError):
            parse_tensor("dims 2 3 2 symmetric\n")


def test_serialize_parses_back(strong_tensor):
    text = serialize_tensor(strong_tensor)
    assert text.splitlines()[0] == "dims 3 3 3"
    assert parse_tensor(text) == strong_tensor


def test_serialize_symmetric_header(symmetric_tensor):
    assert serialize_tensor(symmetric_tensor).startswith("dims 5 5 5 symmetric\n")


def test_symmetric_keeps_listed_entries(symmetric_tensor):
    assert len(symmetric_tensor.listed) == 11
    assert (0, 4, 0) in symmetric_tensor.listed
    assert (4, 0, 0) not in symmetric_tensor.listed
    assert symmetric_tensor.entries[(4, 0, 0)] == 2.0

    text = serialize_tensor(symmetric_tensor)
    assert len(text.splitlines()) == 1 + 11
    assert parse_tensor(text) == symmetric_tensor


class TestHigherOrder:
    def test_load_dispatches_on_header(self, order4_tensor):
        assert isinstance(order4_tensor, HigherTensor)
        assert order4_tensor.dims == (2, 2, 2, 2)
        assert order4_tensor.entries[(1, 1, 0, 0)] == 12.0

    def test_load_cubic(self, data_dir):
        assert isinstance(load_tensor_file(data_dir / "strong_3x3x3.txt"), PartialTensor)

    def test_ordering_is_kept(self):
        tensor = parse_higher_tensor("dims 2 2 2 2\n1 1 1 1 1.0\n", ordering="row_major")
        assert tensor.ordering == "row_major"

    def test_serialize_parses_back(self, order4_tensor):
        text = serialize_higher_tensor(order4_tensor)
        assert text.startswith("dims 2 2 2 2\n")
        assert parse_higher_tensor(text).entries == order4_tensor.entries

    def test_symmetric_order4_rejected(self, data_dir):
        with pytest.raises(TensorFormatError):
            load_tensor_file(data_dir / "order4_2x2x2x2.txt", symmetric=True)

    def test_wrong_order_for_cubic_parser(self):
        with pytest.raises(TensorFormatError, match="expected 3 dimensions"):
            parse_tensor("dims 2 2 2 2\n")


def test_result_to_json():
    result = CompletionResult(status=STATUS_COMPLETED, method="iterative", a=[1.0], b=[2.0], c=[3.0], residual=0.0)
    data = json.loads(result_to_json(result))
    assert data["a"] == [1.0]
    assert data["method"] == "iterative"


def test_result_to_json_order4():
    cubic = CompletionResult(status=STATUS_COMPLETED, method="iterative")
    data = json.loads(result_to_json(Order4Result(status=STATUS_COMPLETED, cubic=cubic, d=[1.0, 0.5])))
    assert data["d"] == [1.0, 0.5]
    assert data["cubic"]["status"] == STATUS_COMPLETED
