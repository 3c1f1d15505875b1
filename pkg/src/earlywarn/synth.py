"""Synthetic login and flag traces with known ground truth.

Populations mix four archetypes.  ``robust`` and ``vulnerable`` accounts are
legitimate; campaigns compromise legitimate accounts with probability
proportional to their vulnerability weight.  After an exploit delay the
attacker's activity starts (the onset day always carries a login), login
behaviour shifts, and the account is flagged ``lag`` days later with no logins
in between, so the flag's lag to the most recent login is exactly the sampled
lag.  ``fake_active`` accounts are flagged the same way from their first active
day; ``fake_dormant`` accounts log in rarely and are never flagged.

``signal_strength`` scales every behavioural difference between vulnerable and
robust accounts, and the campaign shift multipliers: at 0 a compromised account
looks like any other until it is flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import parse_list, parse_number, read_key_values
from .core import AccountSetLedger, DayInterval
from .errors import ConfigError, EmptyDistributionError, SpecError
from .ingest import FlagEvents, LoginEvents, MISSING, write_flag_file, write_login_file

ARCHETYPES = ("robust", "vulnerable", "fake_dormant", "fake_active")
LEGITIMATE = ("robust", "vulnerable")

VOCAB = dict(source=4, login_type=5, action=5, geo=200, asn=5000, user_agent=2000)
BLOCK_SIZE = 8192


@dataclass(frozen=True)
class Archetype:
    name: str
    daily_login_rate: float
    geo_pool: float
    asn_pool: float
    ua_pool: float
    fail_rate: float
    verified_mobile_prob: float
    vulnerability: float

    def __post_init__(self):
        if self.name not in ARCHETYPES:
            raise SpecError(f"unknown archetype {self.name!r}")
        for f in ("daily_login_rate", "geo_pool", "asn_pool", "ua_pool", "vulnerability"):
            if getattr(self, f) < 0:
                raise SpecError(f"{self.name}.{f} must be non-negative")
        for f in ("fail_rate", "verified_mobile_prob"):
            if not 0.0 <= getattr(self, f) <= 1.0:
                raise SpecError(f"{self.name}.{f} must be a probability")


DEFAULT_ARCHETYPES = {
    "robust": Archetype("robust", 0.4, 1.2, 1.5, 1.5, 0.03, 0.9, 0.002),
    "vulnerable": Archetype("vulnerable", 0.8, 4.0, 6.0, 6.0, 0.4, 0.05, 1.0),
    "fake_dormant": Archetype("fake_dormant", 0.05, 1.0, 1.0, 1.0, 0.05, 0.0, 0.0),
    "fake_active": Archetype("fake_active", 3.0, 6.0, 10.0, 3.0, 0.4, 0.0, 0.0),
}


@dataclass(frozen=True)
class CampaignSpec:
    start_day: int
    n_victims: int
    geo_mult: float = 3.0
    asn_mult: float = 3.0
    ua_mult: float = 2.0
    rate_mult: float = 2.0

    def __post_init__(self):
        if self.n_victims < 0:
            raise SpecError("n_victims must be non-negative")
        for f in ("geo_mult", "asn_mult", "ua_mult", "rate_mult"):
            if getattr(self, f) < 1.0:
                raise SpecError(f"campaign {f} must be >= 1")


@dataclass(frozen=True)
class LagDistribution:
    """Cumulative distribution over integer lags.

    Knots are ``(lag, cumulative_probability)``; mass between consecutive knots
    is spread evenly over the integer lags in ``(previous_lag, lag]``.
    """

    cdf: tuple

    def __post_init__(self):
        if not self.cdf:
            raise SpecError("lag distribution needs at least one knot")
        lags = [int(l) for l, _ in self.cdf]
        probs = [float(p) for _, p in self.cdf]
        if any(l < 0 for l in lags) or any(b <= a for a, b in zip(lags, lags[1:])):
            raise SpecError("lags must be non-negative and strictly increasing")
        if any(not 0.0 <= p <= 1.0 for p in probs) or any(b < a for a, b in zip(probs, probs[1:])):
            raise SpecError("cumulative probabilities must be non-decreasing in [0, 1]")
        if abs(probs[-1] - 1.0) > 1e-9:
            raise SpecError(f"final cumulative probability must be 1, got {probs[-1]}")
        object.__setattr__(self, "cdf", tuple(zip(lags, probs)))

    @property
    def lags(self) -> np.ndarray:
        return np.array([l for l, _ in self.cdf], dtype=np.int64)

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.cdf], dtype=np.float64)

    @property
    def max_lag(self) -> int:
        return int(self.cdf[-1][0])

    def cdf_at(self, lag) -> np.ndarray:
        """P(L <= lag) at integer ``lag`` (scalar or array)."""
        lag = np.asarray(lag, dtype=np.float64)
        lags = self.lags.astype(np.float64)
        first = lags[0]
        xs = np.r_[first - 1.0, lags]
        ys = np.r_[0.0, self.probs]
        return np.interp(lag, xs, ys, left=0.0, right=1.0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        lags, probs = self.lags, self.probs
        u = rng.random(size)
        k = np.minimum(np.searchsorted(probs, u, side="left"), probs.size - 1)
        prev_lag = np.where(k > 0, lags[np.maximum(k - 1, 0)], lags[0] - 1)
        prev_p = np.where(k > 0, probs[np.maximum(k - 1, 0)], 0.0)
        width = lags[k] - prev_lag
        mass = probs[k] - prev_p
        frac = np.where(mass > 0, (u - prev_p) / np.where(mass > 0, mass, 1.0), 1.0)
        step = np.minimum(np.floor(frac * width).astype(np.int64), width - 1)
        return prev_lag + 1 + step

    def ks_distance(self, other: "LagDistribution") -> float:
        hi = max(self.max_lag, other.max_lag)
        grid = np.arange(0, hi + 1)
        return float(np.max(np.abs(self.cdf_at(grid) - other.cdf_at(grid))))

    @classmethod
    def fixed(cls, lag: int) -> "LagDistribution":
        return cls(((lag, 1.0),))


# Default lag CDF: share of compromised accounts flagged within N days of onset.
OBSERVED_LAG = LagDistribution((
    (1, 0.7431), (2, 0.7890), (3, 0.8198), (4, 0.8489), (5, 0.8650), (6, 0.8859),
    (7, 0.9000), (21, 0.9859), (28, 1.0),
))


@dataclass(frozen=True)
class TruthRecord:
    account: int
    archetype: str
    compromise_day: int | None
    is_fake: bool
    flag_day: int | None
    lag_days: int | None


@dataclass(frozen=True)
class SynthSpec:
    counts: dict
    n_days: int = 118
    seed: int = 0
    epoch: int = 0
    signal_strength: float = 1.0
    campaigns: tuple = ()
    lag: LagDistribution = OBSERVED_LAG
    exploit_delay: tuple = (0, 14)
    archetypes: dict = field(default_factory=lambda: dict(DEFAULT_ARCHETYPES))

    def __post_init__(self):
        if self.n_days < 1:
            raise SpecError("n_days must be positive")
        for name, n in self.counts.items():
            if name not in ARCHETYPES:
                raise SpecError(f"unknown archetype {name!r}")
            if n < 0:
                raise SpecError(f"negative account count for {name}")
        if sum(self.counts.values()) < 1:
            raise SpecError("population is empty")
        if not 0.0 <= self.signal_strength <= 1.0:
            raise SpecError("signal_strength must be in [0, 1]")
        lo, hi = self.exploit_delay
        if not 0 <= lo <= hi:
            raise SpecError(f"bad exploit delay range {lo}..{hi}")
        for c in self.campaigns:
            if not 0 <= c.start_day < self.n_days:
                raise SpecError(f"campaign start day {c.start_day} outside trace [0, {self.n_days - 1}]")
        if self.counts.get("fake_active", 0) and self.n_days <= self.lag.max_lag + 1:
            raise SpecError("trace too short to flag fake_active accounts within it")


def periodic_campaigns(n_days: int, victims: int, every: int = 7, first: int = 0,
                       **shift) -> tuple:
    return tuple(CampaignSpec(d, victims, **shift) for d in range(first, n_days, every))


def prevalence_campaigns(n_legit: int, n_days: int, monthly_prevalence: float = 0.005) -> tuple:
    """Weekly campaigns compromising about ``monthly_prevalence`` of accounts per 30 days."""
    victims = int(round(monthly_prevalence * n_legit * 7 / 30))
    return periodic_campaigns(n_days, victims)


def _effective(spec: SynthSpec) -> dict:
    """Archetype parameters after applying the signal strength."""
    s = spec.signal_strength
    robust = spec.archetypes["robust"]
    vul = spec.archetypes["vulnerable"]
    mixed = {}
    for f in fields(Archetype):
        if f.name in ("name", "vulnerability"):
            continue
        a, b = getattr(robust, f.name), getattr(vul, f.name)
        mixed[f.name] = a + s * (b - a)
    out = dict(spec.archetypes)
    out["vulnerable"] = replace(vul, **mixed)
    return out


def _account_ids(n: int, seed: int) -> np.ndarray:
    # Multiplication by an odd constant is a bijection mod 2**64, so ids are unique.
    offset = np.random.default_rng([seed, 7]).integers(0, 2**63, dtype=np.uint64)
    idx = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return idx * np.uint64(0x9E3779B97F4A7C15) + offset


def _pool(rng, n_acc, mean_size, vocab):
    """Per-account value pools: sizes 1 + Poisson(mean - 1), values from ``vocab``."""
    mean_size = np.broadcast_to(np.asarray(mean_size, dtype=np.float64), (n_acc,))
    sizes = 1 + rng.poisson(np.maximum(mean_size - 1.0, 0.0))
    width = int(sizes.max()) if n_acc else 1
    values = rng.integers(0, vocab, size=(n_acc, width))
    return sizes, values


def _pick(rng, event_acc, sizes, values):
    k = np.floor(rng.random(event_acc.size) * sizes[event_acc]).astype(np.int64)
    return values[event_acc, k], k


def generate(spec: SynthSpec):
    """Return ``(logins, flags, truth)`` for ``spec``; deterministic given ``spec.seed``."""
    arch = _effective(spec)
    n_days = spec.n_days
    labels = np.concatenate([np.full(spec.counts.get(a, 0), i, dtype=np.int64)
                             for i, a in enumerate(ARCHETYPES)])
    n = labels.size
    pop_rng = np.random.default_rng([spec.seed, 1])
    labels = pop_rng.permutation(labels)
    ids = _account_ids(n, spec.seed)

    # Account timelines (day indices relative to the trace start).
    created = np.zeros(n, dtype=np.int64)
    fake_dormant = labels == ARCHETYPES.index("fake_dormant")
    fake_active = labels == ARCHETYPES.index("fake_active")
    created[fake_dormant] = pop_rng.integers(0, n_days, size=int(fake_dormant.sum()))
    created[fake_active] = pop_rng.integers(0, n_days - spec.lag.max_lag - 1,
                                            size=int(fake_active.sum())) if fake_active.any() else 0
    compromise = np.full(n, -1, dtype=np.int64)
    onset = np.full(n, -1, dtype=np.int64)
    shift = np.ones((n, 4))  # geo, asn, ua, rate multipliers
    legit = np.isin(labels, [ARCHETYPES.index(a) for a in LEGITIMATE])
    weight = np.array([arch[a].vulnerability for a in ARCHETYPES])[labels] * legit

    s = spec.signal_strength
    for ci, camp in enumerate(spec.campaigns):
        rng = np.random.default_rng([spec.seed, 2, ci])
        free = (compromise < 0) & (weight > 0)
        cand = np.flatnonzero(free)
        k = min(camp.n_victims, cand.size)
        if k == 0:
            continue
        p = weight[cand] / weight[cand].sum()
        victims = np.sort(rng.choice(cand, size=k, replace=False, p=p))
        compromise[victims] = camp.start_day
        lo, hi = spec.exploit_delay
        onset[victims] = camp.start_day + rng.integers(lo, hi + 1, size=k)
        mults = np.array([camp.geo_mult, camp.asn_mult, camp.ua_mult, camp.rate_mult])
        shift[victims] = 1.0 + s * (mults - 1.0)
    onset[fake_active] = created[fake_active]

    lag_rng = np.random.default_rng([spec.seed, 3])
    lag = np.full(n, -1, dtype=np.int64)
    has_onset = (onset >= 0) & (onset < n_days)
    onset[~has_onset & (onset >= n_days)] = -1
    lag[has_onset] = spec.lag.sample(lag_rng, int(has_onset.sum()))
    flag_day = np.where(has_onset, onset + lag, -1)
    flagged = has_onset & (flag_day < n_days)
    flag_day[~flagged] = -1

    logins = [_generate_block(spec, arch, labels, created, onset, flag_day, shift, ids, b)
              for b in range(0, n, BLOCK_SIZE)]
    logins = LoginEvents.concat(logins)
    order = np.lexsort((logins.account, logins.day))
    logins = logins[order]

    f_idx = np.flatnonzero(flagged)
    f_order = np.lexsort((ids[f_idx], flag_day[f_idx]))
    f_idx = f_idx[f_order]
    flags = FlagEvents({"account": ids[f_idx], "day": flag_day[f_idx] + spec.epoch})

    truth = []
    for i in range(n):
        name = ARCHETYPES[labels[i]]
        truth.append(TruthRecord(
            int(ids[i]), name,
            int(compromise[i]) + spec.epoch if compromise[i] >= 0 else None,
            name.startswith("fake"),
            int(flag_day[i]) + spec.epoch if flagged[i] else None,
            int(lag[i]) if flagged[i] else None,
        ))
    return logins, flags, truth


def _generate_block(spec, arch, labels, created, onset, flag_day, shift, ids, start):
    stop = min(start + BLOCK_SIZE, labels.size)
    rng = np.random.default_rng([spec.seed, 4, start // BLOCK_SIZE])
    lab = labels[start:stop]
    m = lab.size
    n_days = spec.n_days
    params = {f.name: np.array([getattr(arch[a], f.name) for a in ARCHETYPES])[lab]
              for f in fields(Archetype) if f.name != "name"}
    on = onset[start:stop]
    fl = flag_day[start:stop]
    sh = shift[start:stop]
    cr = created[start:stop]

    # Per-account rate heterogeneity: gamma multiplier with mean 1.
    base_rate = params["daily_login_rate"] * rng.gamma(4.0, 0.25, size=m)
    days = np.arange(n_days)
    attacker = (on[:, None] >= 0) & (days[None, :] >= on[:, None])
    rate = np.where(attacker, base_rate[:, None] * sh[:, 3:4], base_rate[:, None])
    counts = rng.poisson(rate)
    counts[days[None, :] < cr[:, None]] = 0
    has_on = on >= 0
    rows = np.flatnonzero(has_on)
    counts[rows, on[rows]] = np.maximum(counts[rows, on[rows]], 1)
    # Silence between onset and flag so the flag lags the last login by exactly `lag`.
    horizon_end = np.where(fl >= 0, fl, np.where(has_on, n_days - 1, -1))
    quiet = (days[None, :] > on[:, None]) & (days[None, :] <= horizon_end[:, None]) & has_on[:, None]
    counts[quiet] = 0
    is_fake_active = lab == ARCHETYPES.index("fake_active")
    banned = is_fake_active[:, None] & (fl[:, None] >= 0) & (days[None, :] > fl[:, None])
    counts[banned] = 0

    flat = counts.ravel()
    ev_acc = np.repeat(np.arange(m * n_days) // n_days, flat)
    ev_day = np.repeat(np.tile(days, m), flat)
    ev_att = attacker.ravel().repeat(flat)
    n_ev = ev_acc.size

    cols = {}
    src_sz, src_val = _pool(rng, m, 1.3, VOCAB["source"])
    lt_sz, lt_val = _pool(rng, m, 1.3, VOCAB["login_type"])
    act_sz, act_val = _pool(rng, m, 1.5, VOCAB["action"])
    cols["source"], _ = _pick(rng, ev_acc, src_sz, src_val)
    cols["login_type"], _ = _pick(rng, ev_acc, lt_sz, lt_val)
    cols["action"], _ = _pick(rng, ev_acc, act_sz, act_val)

    pooled = {}
    for name, vocab, param, col in (("geo", VOCAB["geo"], "geo_pool", 0),
                                    ("asn", VOCAB["asn"], "asn_pool", 1),
                                    ("user_agent", VOCAB["user_agent"], "ua_pool", 2)):
        own = _pool(rng, m, params[param], vocab)
        hostile = _pool(rng, m, params[param] * sh[:, col], vocab)
        v_own, k_own = _pick(rng, ev_acc, *own)
        v_att, k_att = _pick(rng, ev_acc, *hostile)
        cols[name] = np.where(ev_att, v_att, v_own)
        pooled[name] = np.where(ev_att, k_att, k_own)
    # Geo status: 0 for an account's habitual first location, 1 otherwise.
    cols["geo_status"] = (pooled["geo"] > 0).astype(np.int64)

    success = rng.random(n_ev) >= params["fail_rate"][ev_acc]
    cols["success"] = success.astype(np.int64)
    session_ext = rng.random(n_ev) < 0.3
    cols["status"] = np.where(success, np.where(session_ext, 1, 0), 2)
    pw = np.where(success, 0, np.where(rng.random(n_ev) < 0.9, 1, 2))
    cols["password_status"] = np.where(rng.random(n_ev) < 0.3, MISSING, pw)
    verified = rng.random(m) < params["verified_mobile_prob"]
    vm = verified[ev_acc].astype(np.int64)
    cols["verified_mobile"] = np.where(rng.random(n_ev) < 0.2, MISSING, vm)

    cols["account"] = ids[start:stop][ev_acc]
    cols["day"] = ev_day + spec.epoch
    return LoginEvents(cols)


# -- lag estimation ----------------------------------------------------------

def compute_lag_cdf(ledger: AccountSetLedger, interval: DayInterval) -> LagDistribution:
    """Empirical CDF of (first flag day - most recent login day on or before it).

    Only accounts with a login and a flag inside ``interval`` count.  Knots are
    emitted for every integer lag between the smallest and largest observed.
    """
    lags = observed_lags(ledger, interval)
    if lags.size == 0:
        raise EmptyDistributionError(f"no account has both a login and a flag in {interval}")
    lo, hi = int(lags.min()), int(lags.max())
    grid = np.arange(lo, hi + 1)
    counts = np.bincount(lags - lo, minlength=grid.size)
    cum = np.cumsum(counts) / lags.size
    cum[-1] = 1.0
    return LagDistribution(tuple(zip(grid.tolist(), cum.tolist())))


def observed_lags(ledger: AccountSetLedger, interval: DayInterval) -> np.ndarray:
    ledger.check_window(interval)
    f_acc, f_day = ledger.flag_pairs
    sel = (f_day >= interval.start) & (f_day <= interval.end)
    f_acc, f_day = f_acc[sel], f_day[sel]
    if f_acc.size == 0:
        return np.zeros(0, dtype=np.int64)
    first = np.r_[True, f_acc[1:] != f_acc[:-1]]
    f_acc, f_day = f_acc[first], f_day[first]
    l_acc, l_day = ledger.login_pairs
    sel = (l_day >= interval.start) & (l_day <= interval.end)
    l_acc, l_day = l_acc[sel], l_day[sel]
    # Logins are sorted by (account, day): locate each account's slice, then the
    # last login day not after its first flag.
    lo = np.searchsorted(l_acc, f_acc, side="left")
    hi = np.searchsorted(l_acc, f_acc, side="right")
    lags = []
    for a_lo, a_hi, fd in zip(lo.tolist(), hi.tolist(), f_day.tolist()):
        if a_lo == a_hi:
            continue
        j = a_lo + int(np.searchsorted(l_day[a_lo:a_hi], fd, side="right")) - 1
        if j >= a_lo:
            lags.append(fd - int(l_day[j]))
    return np.array(lags, dtype=np.int64)


# -- spec files and output ---------------------------------------------------

def spec_from_mapping(values: dict) -> SynthSpec:
    values = dict(values)
    counts = {}
    archetypes = dict(DEFAULT_ARCHETYPES)
    kw: dict = {}
    campaign_lines = values.pop("campaign", [])
    periodic = {k: values.pop(k) for k in ("campaign_every", "campaign_victims", "campaign_first")
                if k in values}
    campaigns_none = values.pop("campaigns", "").strip().lower() == "none"
    prevalence = parse_number(values.pop("prevalence", "0.005"), "prevalence", float)
    shift_raw = values.pop("shift", None)
    shift = {}
    if shift_raw is not None:
        g, a, u, r = parse_list(shift_raw.replace(":", ","), "shift", float)
        shift = dict(geo_mult=g, asn_mult=a, ua_mult=u, rate_mult=r)
    for key, raw in values.items():
        if key.startswith("accounts."):
            counts[key.split(".", 1)[1]] = parse_number(raw, key, int)
        elif "." in key:
            name, attr = key.split(".", 1)
            if name not in archetypes or attr not in {f.name for f in fields(Archetype)} - {"name"}:
                raise ConfigError(f"unknown archetype parameter {key!r}")
            archetypes[name] = replace(archetypes[name], **{attr: parse_number(raw, key, float)})
        elif key in ("n_days", "seed", "epoch"):
            kw[key] = parse_number(raw, key, int)
        elif key == "signal_strength":
            kw[key] = parse_number(raw, key, float)
        elif key == "lag":
            kw["lag"] = parse_lag(raw)
        elif key == "exploit_delay":
            try:
                d = DayInterval.parse(raw)
            except ValueError as exc:
                raise ConfigError(f"exploit_delay: {exc}") from None
            kw["exploit_delay"] = (d.start, d.end)
        else:
            raise ConfigError(f"unknown synth key {key!r}")
    n_days = kw.get("n_days", 118)
    if campaigns_none:
        campaigns: tuple = ()
    elif campaign_lines:
        campaigns = tuple(_parse_campaign(c, shift) for c in campaign_lines)
    elif periodic:
        campaigns = periodic_campaigns(
            n_days,
            parse_number(periodic.get("campaign_victims", "0"), "campaign_victims", int),
            parse_number(periodic.get("campaign_every", "7"), "campaign_every", int),
            parse_number(periodic.get("campaign_first", "0"), "campaign_first", int), **shift)
    else:
        n_legit = sum(counts.get(a, 0) for a in LEGITIMATE)
        campaigns = tuple(replace(c, **shift) for c in prevalence_campaigns(n_legit, n_days, prevalence))
    return SynthSpec(counts=counts, campaigns=campaigns, archetypes=archetypes, **kw)


def _parse_campaign(raw: str, shift: dict) -> CampaignSpec:
    parts = [p.strip() for p in raw.split(":")]
    try:
        if len(parts) == 2:
            return CampaignSpec(int(parts[0]), int(parts[1]), **shift)
        if len(parts) == 6:
            return CampaignSpec(int(parts[0]), int(parts[1]), *map(float, parts[2:]))
    except ValueError:
        pass
    raise ConfigError(f"campaign must be 'start:victims' or 'start:victims:geo:asn:ua:rate', got {raw!r}")


def parse_lag(raw: str) -> LagDistribution:
    raw = raw.strip()
    if raw == "observed":
        return OBSERVED_LAG
    if raw.startswith("fixed:"):
        return LagDistribution.fixed(parse_number(raw[6:], "lag", int))
    try:
        knots = [kv.split(":") for kv in raw.split(",")]
        return LagDistribution(tuple((int(l), float(p)) for l, p in knots))
    except ValueError:
        raise ConfigError(f"lag must be 'observed', 'fixed:N' or 'lag:cum,...', got {raw!r}") from None


def load_spec(path) -> SynthSpec:
    return spec_from_mapping(read_key_values(path, multi=("campaign",)))


TRUTH_COLUMNS = ("account", "archetype", "compromise_day", "is_fake", "flag_day")


def write_truth_file(path, truth: Sequence[TruthRecord]) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        fh.write("\t".join(TRUTH_COLUMNS) + "\n")
        for r in sorted(truth, key=lambda r: r.account):
            fh.write(f"{r.account}\t{r.archetype}\t"
                     f"{MISSING if r.compromise_day is None else r.compromise_day}\t"
                     f"{int(r.is_fake)}\t{MISSING if r.flag_day is None else r.flag_day}\n")


def read_truth_file(path) -> list[TruthRecord]:
    out = []
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    for line in lines[1:]:
        acc, name, comp, fake, flag = line.split("\t")
        comp, flag = int(comp), int(flag)
        out.append(TruthRecord(int(acc), name, None if comp == MISSING else comp, fake == "1",
                               None if flag == MISSING else flag, None))
    return out


def write_trace(out_dir, logins: LoginEvents, flags: FlagEvents, truth) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"logins": out / "logins.tsv", "flags": out / "flags.tsv", "truth": out / "truth.tsv"}
    write_login_file(paths["logins"], logins)
    write_flag_file(paths["flags"], flags)
    write_truth_file(paths["truth"], truth)
    return paths
