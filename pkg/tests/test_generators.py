import pytest

from pricedsort.core import stripes_of
from pricedsort.generators import BadParams, default_F, generate_instance


def test_balloon_shape():
    inst = generate_instance("balloon", {"n": 16}, 0)
    assert stripes_of(inst).size_vector == [12] + [1] * 8 + [12]


def test_interleaved_and_two_block():
    assert generate_instance("interleaved", {"n": 4}, 0).ordered_colors() == "RBRBRBRB"
    assert stripes_of(generate_instance("two_block", {"n": 3, "m": 5}, 1)).size_vector == [3, 5]


def test_deterministic_in_seed():
    a = generate_instance("four_level", {"n": 30, "k1": 3, "kF": 1}, 9)
    b = generate_instance("four_level", {"n": 30, "k1": 3, "kF": 1}, 9)
    c = generate_instance("four_level", {"n": 30, "k1": 3, "kF": 1}, 10)
    assert a.order == b.order and a.cost_model.pair_class == b.cost_model.pair_class
    assert a.order != c.order


def test_four_level_counts():
    inst = generate_instance("four_level", {"n": 64, "k1": "sqrt", "kF": 2}, 0)
    cm = inst.cost_model
    classes = [cm.klass(inst, a, b) for a, b in zip(inst.order, inst.order[1:])]
    assert classes.count(1) == 8 and classes.count(2) == 2
    assert cm.F**4 >= 64**3 and (cm.F - 1) ** 4 < 64**3


def test_default_F():
    assert default_F(16) == 8
    assert default_F(81) == 27


def test_gk_cases():
    inst = generate_instance("gk", {"n": 5, "case": 0}, 0)
    assert inst.order[-2:] == (0, 1)
    inst = generate_instance("gk", {"n": 5, "case": 3}, 0)
    assert inst.n == 5 and len(inst.blues()) == 3
    assert inst.order[-3:] == (1, 4, 0)
    assert inst.cost_model.F == 5
    inst = generate_instance("gk", {"n": 5, "case": 2}, 0)
    assert inst.order[-3:] == (1, 3, 0)
    assert inst.cost_model.klass(inst, 0, 1) == 2


def test_bad_params():
    with pytest.raises(BadParams):
        generate_instance("nope", {}, 0)
    with pytest.raises(BadParams):
        generate_instance("balloon", {}, 0)
    with pytest.raises(BadParams):
        generate_instance("four_level", {"n": 5, "k1": 0, "kF": 0}, 0)
