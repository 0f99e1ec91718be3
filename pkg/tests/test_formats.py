import numpy as np
import pytest

from ortcart.formats import (FormatError, format_tensor, parse_tensor, partition_from_json,
                             partition_to_json)
from ortcart.simlab import pinwheel_partition


def test_tensor_roundtrip(rng):
    y = rng.normal(size=(3, 4, 2)) * 1e3
    back = parse_tensor(format_tensor(y))
    assert back.dims == (3, 4, 2)
    assert np.array_equal(back.values, y)


@pytest.mark.parametrize("text", [
    "", "4\n1 2 3 4", "dims: 4\n1 2 3", "dims: 2\n1 x", "dims: 0\n", "dims: 2\n1 nan",
    "dims: a b\n1",
])
def test_tensor_errors(text):
    with pytest.raises(FormatError):
        parse_tensor(text)


def test_free_whitespace():
    y = parse_tensor("dims: 2 2\n1\n2   3\n\t4\n")
    assert y.values.tolist() == [[1, 2], [3, 4]]


def test_partition_json_roundtrip():
    p = pinwheel_partition(9)
    assert partition_from_json(partition_to_json(p), (9, 9)) == p
    with pytest.raises(FormatError):
        partition_from_json("[{\"lo\": [1]}]", (4,))
