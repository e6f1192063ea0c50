import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptcrawl.fetcher import (
    BandwidthProfile,
    ConcurrencyProbe,
    SimBackend,
    SimNetwork,
    SyntheticWeb,
    bandwidth_at,
    load_profile,
    scale_speed,
    sim_fetch,
    write_profile,
)

RAMP = BandwidthProfile(((0, 18), (15000, 2)))


def flat_web(size_kb=36.0, latency=0.0, **kw):
    return SyntheticWeb(page_kb_min=size_kb, page_kb_max=size_kb, latency_min=latency, latency_max=latency, **kw)


def urls(n, site=1):
    return [SyntheticWeb.site_url(site, i) for i in range(n)]


class TestBandwidth:
    @pytest.mark.parametrize("t,expected", [(0, 18.0), (15000, 2.0), (7500, 10.0)])
    def test_ramp(self, t, expected):
        assert bandwidth_at(RAMP, t) == pytest.approx(expected, rel=1e-12)

    def test_holds_past_last_anchor(self):
        assert bandwidth_at(RAMP, 20000) == 2.0

    def test_noise_bounded_and_deterministic(self):
        noisy = RAMP.with_noise(0.05, 7)
        for t in range(0, 15000, 37):
            b = bandwidth_at(noisy, t)
            assert abs(b / RAMP.base_at(t) - 1) <= 0.05 + 1e-12
            assert b == bandwidth_at(RAMP.with_noise(0.05, 7), t)

    def test_noise_constant_within_bucket(self):
        noisy = RAMP.with_noise(0.1, 3)
        assert noisy.noise_at(10.1) == noisy.noise_at(10.9)
        assert noisy.noise_at(10.5) != noisy.noise_at(11.5)

    def test_seeds_differ(self):
        a, b = RAMP.with_noise(0.1, 1), RAMP.with_noise(0.1, 2)
        assert any(a.noise_at(t) != b.noise_at(t) for t in range(20))

    @pytest.mark.parametrize("segs", [(), ((1, 5),), ((0, 5), (0, 6)), ((0, 0),)])
    def test_invalid_profiles(self, segs):
        with pytest.raises(ValueError):
            BandwidthProfile(segs)

    @given(st.floats(0, 15000), st.floats(0, 15000))
    def test_monotone_on_declining_ramp(self, a, b):
        lo, hi = sorted((a, b))
        assert bandwidth_at(RAMP, lo) >= bandwidth_at(RAMP, hi)

    def test_profile_round_trip(self, tmp_path):
        path = tmp_path / "p.csv"
        write_profile(path, RAMP)
        assert load_profile(path).segments == RAMP.segments

    def test_profile_errors_name_the_line(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("t_sec,kb_per_sec\n0,18\n10,abc\n")
        with pytest.raises(ValueError, match=r"p\.csv:3"):
            load_profile(path)


class TestScaleSpeed:
    def test_examples(self):
        assert scale_speed(1.0, 18, 250000) == pytest.approx(13888.9, abs=0.05)
        assert scale_speed(0.08, 2, 250000) == pytest.approx(10000.0, rel=1e-12)
        assert scale_speed(3.3, 7.0, 7.0) == 3.3

    def test_rejects_nonpositive_bandwidth(self):
        with pytest.raises(ValueError):
            scale_speed(1.0, 0.0)

    @given(st.floats(0, 1e3), st.floats(0.1, 1e3), st.floats(0.1, 1e6), st.floats(0.1, 10))
    def test_linear(self, s, b, target, k):
        assert scale_speed(k * s, b, target) == pytest.approx(k * scale_speed(s, b, target), rel=1e-12, abs=1e-12)


class TestSimFetch:
    def test_examples(self):
        prof = BandwidthProfile(((0, 18),))
        web = flat_web(36.0)
        assert sim_fetch(web, prof, urls(1)[0], 1, 0.0).duration == pytest.approx(2.0)
        assert sim_fetch(web, prof, urls(1)[0], 2, 0.0).duration == pytest.approx(4.0)

    def test_unknown_url_times_out(self):
        web = flat_web(timeout=3.0)
        res = sim_fetch(web, RAMP, "http://elsewhere.example/", 1, 0.0)
        assert not res.ok and res.duration == 3.0

    def test_latency_added(self):
        web = flat_web(36.0, latency=0.5)
        assert sim_fetch(web, BandwidthProfile(((0, 18),)), urls(1)[0], 1, 0.0).duration == pytest.approx(2.5)


class TestSyntheticWeb:
    def test_pages_are_deterministic(self):
        web = SyntheticWeb(rng_seed=4)
        assert web.page(urls(1)[0]) == SyntheticWeb(rng_seed=4).page(urls(1)[0])
        assert web.page(urls(1)[0]) != SyntheticWeb(rng_seed=5).page(urls(1)[0])

    def test_out_of_range_pages_missing(self):
        web = SyntheticWeb(pages_per_site=3)
        assert web.page(SyntheticWeb.site_url(1, 2)) is not None
        assert web.page(SyntheticWeb.site_url(1, 3)) is None
        assert web.page("http://site0000001.sim/other") is None

    def test_links_well_formed(self):
        web = SyntheticWeb(rng_seed=1)
        for u in urls(20):
            for link in web.page(u).links:
                assert web.locate(link) is not None


def stepped_batch_time(sizes, latencies, robots, bw, dt=1e-4):
    """Brute-force fixed-step reference for a constant-bandwidth batch."""
    pending = list(zip(sizes, latencies))
    active = []  # [latency_left, bytes_left]
    t = 0.0
    while pending or active:
        while pending and len(active) < robots:
            size, lat = pending.pop(0)
            active.append([lat, size])
        moving = [a for a in active if a[0] <= 0]
        share = bw / len(moving) if moving else 0.0
        for a in active:
            if a[0] > 0:
                a[0] -= dt
            else:
                a[1] -= share * dt
        active = [a for a in active if a[1] > 1e-12]
        t += dt
    return t


class TestSimNetwork:
    def test_zero_latency_conserves_bytes(self):
        prof = BandwidthProfile(((0, 20),))
        web = flat_web(10.0)
        for robots in (1, 2, 5, 16):
            net = SimNetwork(web, prof)
            net.fetch_batch(urls(8), robots)
            assert net.now == pytest.approx(8 * 10.0 / 20.0, rel=1e-9)

    def test_matches_fixed_step_reference(self):
        prof = BandwidthProfile(((0, 20),))
        web = SyntheticWeb(rng_seed=9, page_kb_min=5, page_kb_max=15, latency_min=0.05, latency_max=0.4)
        batch = urls(7, site=3)
        pages = [web.page(u) for u in batch]
        net = SimNetwork(web, prof)
        net.fetch_batch(batch, 3)
        ref = stepped_batch_time([p.size_kb for p in pages], [p.latency for p in pages], 3, 20.0)
        assert net.now == pytest.approx(ref, abs=5e-3)

    def test_rate_tracks_bandwidth_changes(self):
        # a 100 kB page over a 0-10s ramp from 10 to 30 kB/s: integral of bw must be 100
        prof = BandwidthProfile(((0, 10), (10, 30)))
        net = SimNetwork(flat_web(100.0), prof)
        net.fetch_batch(urls(1), 1)
        # integral 10t + t^2 = 100 -> t = -5 + sqrt(125); piecewise-constant buckets bias it slightly late
        exact = -5 + math.sqrt(125)
        assert exact <= net.now <= exact + 0.5

    def test_probe_limits_and_waves(self):
        probe = ConcurrencyProbe(keep_trace=True)
        net = SimNetwork(flat_web(10.0), BandwidthProfile(((0, 20),)), probe)
        res = net.fetch_batch(urls(3), 2)
        assert all(r.ok for r in res)
        assert probe.violations == 0
        assert probe.max_in_flight == 2
        in_flight = [n for _, n, _ in probe.trace]
        assert in_flight[0] == 2 and in_flight[-1] == 1

    def test_missing_page_costs_timeout(self):
        net = SimNetwork(flat_web(timeout=2.0), BandwidthProfile(((0, 20),)))
        res = net.fetch_batch(["http://nowhere.example/"], 1)
        assert not res[0].ok
        assert net.now == pytest.approx(2.0)

    def test_results_in_request_order(self):
        web = SyntheticWeb(rng_seed=2)
        batch = urls(6, site=7)
        res = SimNetwork(web, RAMP).fetch_batch(batch, 4)
        assert [r.url for r in res] == [web.page(u).url for u in batch]

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 12), st.integers(1, 8), st.integers(0, 50))
    def test_never_exceeds_robot_limit(self, n, robots, seed):
        web = SyntheticWeb(rng_seed=seed)
        backend = SimBackend(web, RAMP.with_noise(0.05, seed))
        backend.fetch_level(urls(n, site=seed + 1), robots)
        assert backend.probe.violations == 0
        assert backend.probe.max_in_flight <= robots
        assert backend.probe.max_rate_error <= 1e-9

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 6), st.integers(1, 10))
    def test_more_robots_never_slower_without_latency(self, n, robots):
        prof = BandwidthProfile(((0, 20),))
        a = SimNetwork(flat_web(10.0), prof)
        b = SimNetwork(flat_web(10.0), prof)
        a.fetch_batch(urls(n), robots)
        b.fetch_batch(urls(n), robots + 1)
        assert b.now <= a.now + 1e-9
