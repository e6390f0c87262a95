import pytest
from hypothesis import given, strategies as st

from firingcell.registers import DELAY, HISTORY, RegisterBank, ShiftRegister


def test_history_shift_moves_towards_higher_slots():
    reg = ShiftRegister(4, HISTORY)
    reg[0] = 1.0
    out = reg.shift(fill=2.0)
    assert out == 0.0
    assert reg.slots == [2.0, 1.0, 0.0, 0.0]
    reg.shift()
    reg.shift()
    assert reg.shift() == 1.0
    assert reg.slots == [0.0, 0.0, 0.0, 2.0]


def test_delay_shift_moves_towards_slot_zero():
    reg = ShiftRegister.from_slots([1.0, 2.0, 3.0], DELAY)
    assert reg.shift(fill=9.0) == 1.0
    assert reg.slots == [2.0, 3.0, 9.0]


def test_length_is_fixed_and_reset_zeroes():
    reg = ShiftRegister(30)
    for v in range(100):
        reg.shift(float(v))
    assert len(reg) == 30
    reg.reset()
    assert reg.slots == [0.0] * 30


def test_add_with_floor():
    reg = ShiftRegister(3, DELAY)
    reg.add([-4.0, -8.0, -12.0], floor=-10.0)
    assert reg.slots == [-4.0, -8.0, -10.0]


def test_unknown_mode():
    with pytest.raises(ValueError):
        ShiftRegister(3, "sideways")


@given(st.lists(st.tuples(st.integers(0, 3), st.floats(-5, 5)), max_size=40), st.integers(0, 3))
def test_bank_matches_independent_delay_registers(ops, which):
    bank = RegisterBank(4, 6)
    regs = [ShiftRegister(6, DELAY) for _ in range(4)]
    samples = [0.0, 1.0, 2.0, 1.5, 0.5, 0.25]
    for i, scale in ops:
        bank.add(i, samples, scale)
        regs[i].add(samples, scale)
        bank.shift()
        for r in regs:
            r.shift()
    for i in range(4):
        assert bank.slots(i) == pytest.approx(regs[i].slots, abs=1e-12)
    assert bank.view(which).slots == bank.slots(which)
