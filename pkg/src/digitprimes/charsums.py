"""Dirichlet character arithmetic mod q: group enumeration, conductors,
Gauss and Ramanujan sums, induced-character identities, and twisted
Chebyshev sums.

Characters are stored as exponent vectors on fixed generators of the unit
group: one generator per odd prime-power factor (a primitive root chosen to
work for every power of that prime), and the pair (-1, 3) for 2^a with
a >= 3.  Values are evaluated through precomputed discrete-log tables and a
cached root-of-unity table per modulus, so every character value is an exact
root of unity up to one complex rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from digitprimes.errors import ConsistencyError, ParameterError, RangeError
from digitprimes.numutil import cis, phase_mod1
from digitprimes.sieve import MangoldtTable

MAX_MODULUS = 10 ** 6
_CHUNK = 1 << 20


# ---------------------------------------------------------------------------
# elementary arithmetic

def factorize(q: int) -> list[tuple[int, int]]:
    """Prime factorisation [(p, e), ...] by trial division."""
    if q < 1:
        raise ParameterError("modulus must be positive")
    out = []
    for p in range(2, math.isqrt(q) + 1):
        if q % p == 0:
            e = 0
            while q % p == 0:
                q //= p
                e += 1
            out.append((p, e))
    if q > 1:
        out.append((q, 1))
    return out


def euler_phi(q: int) -> int:
    phi = 1
    for p, e in factorize(q):
        phi *= p ** (e - 1) * (p - 1)
    return phi


def mobius(q: int) -> int:
    mu = 1
    for _, e in factorize(q):
        if e > 1:
            return 0
        mu = -mu
    return mu


def is_squarefree(q: int) -> bool:
    return all(e == 1 for _, e in factorize(q))


def _primitive_root(p: int) -> int:
    """Smallest generator of (Z/p)*, lifted to work mod every p^e."""
    order = p - 1
    factors = [f for f, _ in factorize(order)]
    g = 2
    while True:
        if all(pow(g, order // f, p) != 1 for f in factors):
            break
        g += 1
    if pow(g, p - 1, p * p) == 1:
        g += p
    return g


@dataclass(frozen=True)
class _Component:
    """One cyclic component of (Z/q)*: generator of the given order inside
    the prime-power factor `modulus`."""

    modulus: int
    generator: int
    order: int
    dlog: np.ndarray  # int64 per residue mod `modulus`; -1 off the orbit


def _components_for_factor(p: int, e: int) -> list[_Component]:
    pe = p ** e
    if p == 2:
        if e == 1:
            return []
        if e == 2:
            dlog = np.full(4, -1, dtype=np.int64)
            dlog[1], dlog[3] = 0, 1
            return [_Component(4, 3, 2, dlog)]
        half = 1 << (e - 2)
        dlog_sign = np.full(pe, -1, dtype=np.int64)
        dlog_three = np.full(pe, -1, dtype=np.int64)
        a = 1
        for i in range(half):
            dlog_sign[a], dlog_three[a] = 0, i
            dlog_sign[pe - a], dlog_three[pe - a] = 1, i
            a = (a * 3) % pe
        return [
            _Component(pe, pe - 1, 2, dlog_sign),
            _Component(pe, 3, half, dlog_three),
        ]
    g = _primitive_root(p)
    order = pe // p * (p - 1)
    dlog = np.full(pe, -1, dtype=np.int64)
    a = 1
    for i in range(order):
        dlog[a] = i
        a = (a * g) % pe
    return [_Component(pe, g % pe, order, dlog)]


class CharacterGroup:
    """Fixed generator data for the full character group mod q."""

    def __init__(self, q: int):
        if q < 1:
            raise ParameterError("modulus must be positive")
        if q > MAX_MODULUS:
            raise ParameterError(f"modulus above enumeration cap {MAX_MODULUS}")
        self.q = q
        self.primes = tuple(p for p, _ in factorize(q))
        self.components: list[_Component] = []
        for p, e in factorize(q):
            self.components.extend(_components_for_factor(p, e))
        self.orders = tuple(c.order for c in self.components)
        self.phi = math.prod(self.orders) if self.orders else 1
        self.exponent = math.lcm(*self.orders) if self.orders else 1
        self._roots: np.ndarray | None = None
        self._unit_log: np.ndarray | None = None

    def roots(self) -> np.ndarray:
        if self._roots is None:
            self._roots = cis(np.arange(self.exponent) / float(self.exponent))
        return self._roots

    def _per_residue_logs(self) -> np.ndarray:
        """(len(components), q) table of component dlogs for 0 <= a < q."""
        if self._unit_log is None:
            a = np.arange(self.q, dtype=np.int64)
            rows = [c.dlog[a % c.modulus] for c in self.components]
            self._unit_log = (
                np.stack(rows) if rows else np.zeros((0, self.q), dtype=np.int64)
            )
        return self._unit_log

    def character(self, exponents) -> "DirichletCharacter":
        exponents = tuple(int(t) % o for t, o in zip(exponents, self.orders))
        if len(exponents) != len(self.orders):
            raise ParameterError("wrong exponent vector length")
        return DirichletCharacter(self, exponents)


@lru_cache(maxsize=128)
def character_group(q: int) -> CharacterGroup:
    return CharacterGroup(q)


class DirichletCharacter:
    """A character mod q given by exponents on the group's generators."""

    def __init__(self, group: CharacterGroup, exponents: tuple[int, ...]):
        self.group = group
        self.exponents = exponents

    # identity is (q, exponents); the group object is shared plumbing
    def __eq__(self, other):
        return (
            isinstance(other, DirichletCharacter)
            and self.q == other.q
            and self.exponents == other.exponents
        )

    def __hash__(self):
        return hash((self.q, self.exponents))

    def __repr__(self):
        return f"DirichletCharacter(q={self.q}, exponents={self.exponents})"

    @property
    def q(self) -> int:
        return self.group.q

    @property
    def index(self) -> int:
        idx = 0
        for t, o in zip(self.exponents, self.group.orders):
            idx = idx * o + t
        return idx

    @property
    def is_principal(self) -> bool:
        return all(t == 0 for t in self.exponents)

    def conjugate(self) -> "DirichletCharacter":
        return DirichletCharacter(
            self.group, tuple((-t) % o for t, o in zip(self.exponents, self.group.orders))
        )

    def _weights(self) -> np.ndarray:
        e = self.group.exponent
        return np.array(
            [t * (e // o) for t, o in zip(self.exponents, self.group.orders)],
            dtype=np.int64,
        )

    def __call__(self, a: int) -> complex:
        a = int(a) % self.q
        if math.gcd(a, self.q) != 1:
            return 0.0 + 0.0j
        num = 0
        for c, t in zip(self.group.components, self.exponents):
            num += t * (self.group.exponent // c.order) * int(c.dlog[a % c.modulus])
        return complex(self.group.roots()[num % self.group.exponent])

    def values(self) -> np.ndarray:
        """chi(a) for 0 <= a < q as a complex array (0 off the units)."""
        group = self.group
        a = np.arange(self.q, dtype=np.int64)
        unit = np.ones(self.q, dtype=bool)
        for p in group.primes:  # bare factors (2^1) carry no component
            unit &= (a % p) != 0
        if self.q == 1:
            unit[:] = True
        logs = group._per_residue_logs()
        num = np.zeros(self.q, dtype=np.int64)
        for row, w in zip(logs, self._weights()):
            num[unit] += w * row[unit]
        out = np.zeros(self.q, dtype=np.complex128)
        out[unit] = group.roots()[num[unit] % group.exponent]
        return out


def characters_mod(q: int) -> list[DirichletCharacter]:
    """All phi(q) characters mod q, principal first (index 0)."""
    group = character_group(q)
    chars = []
    for idx in range(group.phi):
        exps = []
        rem = idx
        for o in reversed(group.orders):
            exps.append(rem % o)
            rem //= o
        chars.append(DirichletCharacter(group, tuple(reversed(exps))))
    return chars


def primitive_characters(q: int) -> list[DirichletCharacter]:
    return [chi for chi in characters_mod(q) if conductor(chi)[0] == q]


# ---------------------------------------------------------------------------
# conductor and induced characters

def _component_conductors(chi: DirichletCharacter) -> dict[int, tuple]:
    """Per prime factor: (conductor power p^c, reduced exponent data)."""
    comps = chi.group.components
    exps = chi.exponents
    out: dict[int, tuple] = {}
    i = 0
    while i < len(comps):
        c = comps[i]
        p = factorize(c.modulus)[0][0]
        if p == 2 and c.order == 2 and i + 1 < len(comps) and comps[i + 1].modulus == c.modulus:
            t_sign, t_three = exps[i], exps[i + 1]
            e = c.modulus.bit_length() - 1
            half_order = comps[i + 1].order  # 2^(e-2)
            if t_sign == 0 and t_three == 0:
                out[2] = (1, ())
            elif (t_sign * (half_order // 2) + t_three) % half_order == 0:
                out[2] = (4, (1,))
            elif t_three == 0:
                out[2] = (8, (1, 0))
            else:
                v = (t_three & -t_three).bit_length() - 1
                cexp = e - v
                out[2] = (1 << cexp, (t_sign, t_three >> (e - cexp)))
            i += 2
            continue
        if p == 2:  # modulus 4, single component
            out[2] = (1, ()) if exps[i] == 0 else (4, (1,))
            i += 1
            continue
        t = exps[i]
        if t == 0:
            out[p] = (1, ())
        else:
            order = c.order // math.gcd(c.order, t)
            x = 0
            while order % p == 0:
                order //= p
                x += 1
            pc = p ** (x + 1)
            phi_pc = pc // p * (p - 1)
            out[p] = (pc, (t * phi_pc // c.order,))
        i += 1
    return out


def conductor(chi: DirichletCharacter) -> tuple[int, DirichletCharacter]:
    """Smallest modulus q1 | q inducing chi, with the primitive inducing
    character chi1 mod q1."""
    per_factor = _component_conductors(chi)
    q1 = math.prod(pc for pc, _ in per_factor.values()) if per_factor else 1
    group1 = character_group(q1)
    # components of group1 appear factor by factor in the same (sign, three)
    # order they were emitted for chi's group, so consume positionally
    pending = {p: list(data) for p, (_, data) in per_factor.items()}
    exps: list[int] = []
    for comp in group1.components:
        p = factorize(comp.modulus)[0][0]
        exps.append(pending[p].pop(0))
    chi1 = group1.character(exps)
    return q1, chi1


def is_primitive(chi: DirichletCharacter) -> bool:
    return conductor(chi)[0] == chi.q


# ---------------------------------------------------------------------------
# Gauss and Ramanujan sums

def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = sum_m chi(m) e(m/q), direct evaluation."""
    q = chi.q
    return complex(np.dot(chi.values(), cis(np.arange(q) / float(q))))


def twisted_gauss_sum(chi: DirichletCharacter, k: int) -> complex:
    """sum_a chi(a) e(a k / q), direct evaluation."""
    q = chi.q
    return complex(np.dot(chi.values(), cis((np.arange(q) * (int(k) % q) % q) / float(q))))


def _divisors(q: int) -> list[int]:
    divs = [1]
    for p, e in factorize(q):
        divs = [d * p ** i for d in divs for i in range(e + 1)]
    return sorted(divs)


@lru_cache(maxsize=1024)
def _unit_mask(q: int) -> np.ndarray:
    a = np.arange(q, dtype=np.int64)
    mask = np.ones(q, dtype=bool)
    for p, _ in factorize(q):
        mask &= (a % p) != 0
    if q == 1:
        mask[:] = True
    return mask


def ramanujan_row(q: int) -> np.ndarray:
    """c_q(k) for all 0 <= k < q, closed form cross-checked against the
    literal unit sum (computed exactly by an FFT of the unit indicator)."""
    if q < 1:
        raise ParameterError("modulus must be positive")
    k = np.arange(q, dtype=np.int64)
    g = np.gcd(k, q) if q > 1 else np.ones(1, dtype=np.int64)
    by_div = {d: mobius(q // d) * euler_phi(q) // euler_phi(q // d) for d in _divisors(q)}
    closed = np.array([by_div[int(d)] for d in g], dtype=np.int64)
    direct = np.fft.ifft(_unit_mask(q).astype(np.float64)) * q
    if np.max(np.abs(direct - closed)) > 1e-6:
        raise ConsistencyError(f"c_{q}: closed form disagrees with unit sum")
    return closed


def ramanujan_sum(q: int, k: int) -> int:
    """c_q(k) = sum over units a mod q of e(a k / q).

    Evaluates the Moebius/totient closed form and an independent direct
    route (divisor convolution, plus the literal unit sum for small q); a
    mismatch raises ConsistencyError, which would indicate a bug.
    """
    if q < 1:
        raise ParameterError("modulus must be positive")
    k = int(k) % q if q > 1 else 0
    g = math.gcd(q, k) if q > 1 else 1
    closed = mobius(q // g) * euler_phi(q) // euler_phi(q // g)
    direct = sum(d * mobius(q // d) for d in _divisors(q) if k % d == 0)
    if direct != closed:
        raise ConsistencyError(f"c_{q}({k}): closed {closed} != divisor route {direct}")
    if q <= 4096:
        units = np.flatnonzero(_unit_mask(q))
        trig = np.sum(cis(units * k % q / float(q)))
        if abs(trig.real - closed) > 1e-6 or abs(trig.imag) > 1e-6:
            raise ConsistencyError(f"c_{q}({k}): trig route {trig} != closed {closed}")
    return closed


# ---------------------------------------------------------------------------
# identity verification reports

@dataclass(frozen=True)
class IdentityReport:
    left: complex
    right: complex

    @property
    def delta(self) -> float:
        return abs(self.left - self.right)


def verify_tau_induced(chi: DirichletCharacter, chi1: DirichletCharacter | None = None) -> IdentityReport:
    """Check tau(conj chi) = mu(q2) * conj(chi1)(q2) * tau(conj chi1) with
    q2 = q/q1; both sides vanish unless q2 is squarefree and coprime to q1."""
    q1, induced = conductor(chi)
    if chi1 is None:
        chi1 = induced
    q2 = chi.q // q1
    left = gauss_sum(chi.conjugate())
    right = mobius(q2) * chi1.conjugate()(q2) * gauss_sum(chi1.conjugate())
    return IdentityReport(left, right)


@dataclass(frozen=True)
class ExpansionReport:
    q: int
    k: int
    q1: int
    q2: int
    prerequisite_ok: bool
    left: complex
    right: complex | None
    normalized_left: complex | None = None
    normalized_right: complex | None = None

    @property
    def delta(self) -> float:
        return abs(self.left - self.right) if self.right is not None else float("nan")

    @property
    def normalized_delta(self) -> float:
        if self.normalized_right is None:
            return float("nan")
        return abs(self.normalized_left - self.normalized_right)


def verify_additive_expansion(chi: DirichletCharacter, k: int) -> ExpansionReport:
    """Check sum_a e_q(ak) chi(a) = chi1(q2) conj(chi1)(k) tau(chi1) c_{q2}(k)
    (valid whenever gcd(q1, q2) = 1), plus the normalised form carrying the
    q1/phi(q1) factor when q2 is additionally squarefree."""
    q = chi.q
    k = int(k) % q if q > 1 else 0
    q1, chi1 = conductor(chi)
    q2 = q // q1
    left = twisted_gauss_sum(chi, k)
    if math.gcd(q1, q2) != 1:
        return ExpansionReport(q, k, q1, q2, False, left, None)
    right = chi1(q2) * np.conj(chi1(k)) * gauss_sum(chi1) * ramanujan_sum(q2, k)
    if not is_squarefree(q2):
        return ExpansionReport(q, k, q1, q2, True, left, right)
    g = math.gcd(q2, k) if q2 > 1 else 1
    norm_left = gauss_sum(chi.conjugate()) * twisted_gauss_sum(chi, -k) / euler_phi(q)
    norm_right = (
        q1
        / euler_phi(q1)
        * mobius(g)
        / euler_phi(q2 // g)
        * np.conj(chi1(k))
    )
    return ExpansionReport(q, k, q1, q2, True, left, right, norm_left, norm_right)


def additive_expansion_max_delta(chi: DirichletCharacter) -> tuple[bool, float, float]:
    """Identity deviations over every shift k < q at once (FFT route).

    Returns (prerequisite_ok, max |lhs_k - rhs_k|, max normalised delta);
    the normalised delta is NaN when q2 is not squarefree.
    """
    q = chi.q
    q1, chi1 = conductor(chi)
    q2 = q // q1
    if math.gcd(q1, q2) != 1:
        return False, float("nan"), float("nan")
    values = chi.values()
    lhs = np.fft.ifft(values) * q  # lhs[k] = sum_a chi(a) e(ak/q)
    k = np.arange(q, dtype=np.int64)
    chi1_conj_at_k = np.conj(chi1.values())[k % q1]
    c_row = ramanujan_row(q2)[k % q2]
    rhs = chi1(q2) * gauss_sum(chi1) * chi1_conj_at_k * c_row
    max_delta = float(np.max(np.abs(lhs - rhs)))
    if not is_squarefree(q2):
        return True, max_delta, float("nan")
    tau_conj = gauss_sum(chi.conjugate())
    norm_lhs = tau_conj * lhs[(-k) % q] / euler_phi(q)
    g = np.gcd(k % q2, q2) if q2 > 1 else np.ones(q, dtype=np.int64)
    mu_g = np.array([mobius(int(d)) for d in g])
    phi_qg = np.array([euler_phi(q2 // int(d)) for d in g])
    norm_rhs = (q1 / euler_phi(q1)) * mu_g / phi_qg * chi1_conj_at_k
    return True, max_delta, float(np.max(np.abs(norm_lhs - norm_rhs)))


# ---------------------------------------------------------------------------
# twisted Chebyshev sums

def psi_chi(u: int, chi: DirichletCharacter, table: MangoldtTable) -> complex:
    """psi(u, chi) = sum_{k <= u} chi(k) Lambda(k)  (k < 2^n)."""
    if u < 0 or u > table.limit:
        raise RangeError("u outside table range")
    hi = min(int(u), table.limit - 1)
    vals = chi.values()
    total = 0.0 + 0.0j
    for lo in range(0, hi + 1, _CHUNK):
        k = np.arange(lo, min(lo + _CHUNK, hi + 1), dtype=np.int64)
        total += np.dot(table.values[k[0] : k[-1] + 1], vals[k % chi.q])
    return complex(total)


def psi_chi_max(chi: DirichletCharacter, table: MangoldtTable) -> float:
    """max over u < 2^n of |psi(u, chi)|, one streaming pass."""
    vals = chi.values()
    best = 0.0
    carry = 0.0 + 0.0j
    N = table.limit
    for lo in range(0, N, _CHUNK):
        k = np.arange(lo, min(lo + _CHUNK, N), dtype=np.int64)
        partial = np.cumsum(table.values[k[0] : k[-1] + 1] * vals[k % chi.q]) + carry
        best = max(best, float(np.max(np.abs(partial))))
        carry = partial[-1]
    return best


def twisted_lambda_sum(chi: DirichletCharacter, beta: float, table: MangoldtTable) -> complex:
    """sum_{k < 2^n} chi(k) Lambda(k) e(k beta)."""
    if abs(beta) > 0.5:
        raise ParameterError("|beta| must be at most 1/2")
    vals = chi.values()
    total = 0.0 + 0.0j
    N = table.limit
    for lo in range(0, N, _CHUNK):
        k = np.arange(lo, min(lo + _CHUNK, N), dtype=np.int64)
        phases = phase_mod1(k, beta)
        total += np.dot(table.values[k[0] : k[-1] + 1] * vals[k % chi.q], cis(phases))
    return complex(total)


@dataclass(frozen=True)
class CharacterExpansionReport:
    q: int
    a: int
    beta: float
    left: complex
    right: complex
    bound: float

    @property
    def delta(self) -> float:
        return abs(self.left - self.right)


def verify_character_expansion(q: int, a: int, beta: float, table: MangoldtTable) -> CharacterExpansionReport:
    """Compare S(a/q + beta) against its multiplicative-character expansion.

    The difference is exactly the prime powers sharing a factor with q, which
    stays below (log N)^2 for q <= N.
    """
    if q < 1 or q > 100:
        raise ParameterError("q must be in [1, 100] for this report")
    if table.n > 20:
        raise ParameterError("n must be at most 20 for this report")
    a = int(a) % q
    if math.gcd(a, q) != 1:
        raise ParameterError("a must be coprime to q")
    N = table.limit
    k = np.arange(N, dtype=np.int64)
    phases = np.mod((k % q) * a % q / float(q) + phase_mod1(k, beta), 1.0)
    left = complex(np.dot(table.values, cis(phases)))
    phi_q = euler_phi(q)
    right = 0.0 + 0.0j
    for chi in characters_mod(q):
        right += gauss_sum(chi.conjugate()) * chi(a) * twisted_lambda_sum(chi, beta, table)
    right /= phi_q
    bound = math.log(N) ** 2
    return CharacterExpansionReport(q, a, beta, left, complex(right), bound)
