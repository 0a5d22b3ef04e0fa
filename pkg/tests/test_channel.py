import math

import numpy as np
import pytest

from galaxyid.channel import (
    ChannelOutput,
    DecoderParams,
    identify,
    in_shell,
    in_slab,
    slab_separation_margin,
    transmit,
)
from galaxyid.galaxy import Codeword
from galaxyid.gaussian import projection_tail


def params100():
    return DecoderParams(n=100, sigma=1.0)


def test_decoder_params_defaults():
    p = params100()
    assert p.eps_n == pytest.approx(math.log2(100) / 10)
    assert p.slab_halfwidth == pytest.approx(math.log2(100))
    lo, hi = p.shell_bounds
    assert lo == pytest.approx(100 * (1 - p.eps_n))
    assert hi == pytest.approx(100 * (1 + p.eps_n))


def test_shell_lower_bound_clamps():
    p = DecoderParams(n=4, sigma=0.5)  # eps_n = 1 > sigma^2
    lo, hi = p.shell_bounds
    assert lo == 0.0
    assert hi == pytest.approx(4 * (0.25 + 1.0))


def test_transmit():
    u = np.arange(5.0)
    rng = np.random.default_rng(0)
    y0 = transmit(u, 0.0, rng)
    np.testing.assert_array_equal(y0, u)
    y1 = transmit(u, 1.0, np.random.default_rng(5))
    y2 = transmit(u, 1.0, np.random.default_rng(5))
    np.testing.assert_array_equal(y1, y2)
    with pytest.raises(ValueError):
        transmit(u, -1.0, rng)


def test_transmit_noise_scale():
    rng = np.random.default_rng(3)
    u = np.zeros(100)
    total = 0.0
    trials = 2000
    for _ in range(trials):
        y = transmit(u, 1.0, rng)
        total += float(np.dot(y, y)) / 100
    mean = total / trials
    se = math.sqrt(2 / 100) / math.sqrt(trials)
    assert abs(mean - 1.0) <= 3 * se


def test_in_shell():
    p = params100()
    u = np.zeros(100)
    # y = u: squared distance 0 sits below the lower edge when eps < sigma^2
    assert not in_shell(u, u, p)
    y = np.zeros(100)
    y[0] = 10.0  # squared distance exactly n sigma^2
    assert in_shell(y, u, p)
    y[0] = math.sqrt(100 * (1 + p.eps_n)) + 1e-6
    assert not in_shell(y, u, p)


def test_in_slab():
    p = params100()
    o = np.zeros(100)
    u = np.zeros(100)
    u[0] = 5.0
    assert in_slab(u, o, u, p)
    # orthogonal displacement of any size is invisible to the slab
    y = u.copy()
    y[1] = 1e6
    assert in_slab(y, o, u, p)
    # along-line displacement beyond the half-width is rejected
    y = u.copy()
    y[0] += 2 * p.slab_halfwidth
    assert not in_slab(y, o, u, p)
    with pytest.raises(ValueError):
        in_slab(y, u, u, p)


def _toy_codeword(n=100, t_bar=2):
    u = np.zeros(n)
    u[0] = 30.0
    o1 = np.zeros(n)
    o1[0] = 20.0
    o2 = np.zeros(n)
    return Codeword(u=u, path=[o1, o2], root_index=0, index_path=(0, 0), leaf_index=0)


def test_identify_cases():
    p = params100()
    c = _toy_codeword()
    # shell-exact output, orthogonal to both slab lines
    y = c.u.copy()
    y[1] = 10.0
    assert in_shell(y, c.u, p)
    assert identify(y, c, p)
    # y = u fails via the shell alone
    assert not identify(c.u, c, p)
    # far along the first slab line, shell kept satisfied: rejected via slab
    y2 = c.u.copy()
    y2[0] += math.sqrt(100.0)
    assert in_shell(y2, c.u, p)
    assert not identify(y2, c, p)


def test_identify_equals_plain_conjunction():
    p = params100()
    c = _toy_codeword()
    rng = np.random.default_rng(11)
    for _ in range(200):
        y = c.u + rng.standard_normal(100) * rng.uniform(0.5, 1.5)
        expected = in_shell(y, c.u, p) and all(in_slab(y, o, c.u, p) for o in c.path)
        assert identify(y, c, p) == expected


def test_shell_depends_only_on_distance():
    # metamorphic: random rotations about u leave the shell decision unchanged
    p = DecoderParams(n=16, sigma=1.0)
    rng = np.random.default_rng(12)
    u = rng.standard_normal(16)
    for _ in range(20):
        z = rng.standard_normal(16)
        q, _ = np.linalg.qr(rng.standard_normal((16, 16)))
        assert in_shell(u + z, u, p) == in_shell(u + q @ z, u, p)


def test_channel_output_record():
    out = ChannelOutput(y=np.zeros(3), source_index=7)
    assert out.source_index == 7


def test_empirical_slab_acceptance():
    # own-transmission slab acceptance matches 1 - 2 Phi(-log2 n) at n = 16
    n = 16
    p = DecoderParams(n=n, sigma=1.0)
    u = np.zeros(n)
    u[0] = 4.0
    o = np.zeros(n)
    direction = np.zeros(n)
    direction[0] = 1.0
    rng = np.random.default_rng(21)
    trials = 1_000_000
    hits = 0
    for _ in range(10):
        z = rng.standard_normal((trials // 10, n))
        along = np.abs(z @ direction)
        hits += int(np.sum(along <= p.slab_halfwidth))
    p_hat = hits / trials
    expected = 1.0 - projection_tail(math.log2(n))
    width = 3 * math.sqrt(expected * (1 - expected) / trials)
    assert abs(p_hat - expected) <= 3 * width


def test_slab_separation_margin():
    # isoceles geometry: both codewords at distance r from the meet center
    n = 100
    r = 10.0
    o = np.zeros(n)
    u1 = np.zeros(n)
    u1[0] = r
    u2 = np.zeros(n)
    u2[1] = r
    d2 = 2 * r * r
    expected = d2 / (2 * r)  # (r^2 + d^2 - r^2) / (2 r)
    assert slab_separation_margin(u1, u2, o) == pytest.approx(expected)
    with pytest.raises(ValueError):
        slab_separation_margin(o, u2, o)


def test_degenerate_sigma_zero_type2():
    # sigma = 0: y = u2 exactly; with d^2 above the shell window the target
    # codeword's decision set never accepts
    n = 16
    dec = DecoderParams(n=n, sigma=0.0, eps_n=1.0, slab_halfwidth=4.0)
    u1 = np.zeros(n)
    u1[0] = 6.0
    o = np.zeros(n)
    u2 = np.zeros(n)
    u2[0] = 6.0
    u2[1] = 10.0  # d^2 = 100 > n * eps_n = 16
    c1 = Codeword(u=u1, path=[o], root_index=0, index_path=(0,), leaf_index=0)
    y = transmit(u2, 0.0, np.random.default_rng(0))
    np.testing.assert_array_equal(y, u2)
    assert not in_shell(y, u1, dec)
    assert not identify(y, c1, dec)
