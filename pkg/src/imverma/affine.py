"""Untwisted affine algebras in the loop realization, and order-2 twists.

ghat = g (x) C[t,t^-1] + C c + C d with

    [x (x) t^n, y (x) t^m] = [x,y] (x) t^{n+m} + delta_{n,-m} n (x|y) c
    [d, x (x) t^n] = n x (x) t^n,   c central

(x|y) is the invariant form of the finite algebra normalized to
(theta|theta) = 2, so levels come out in standard units. Affine roots are
(finite part, delta coefficient) pairs; the affine simple root alpha_0 is
(-theta, 1) and e_0 = x_{-theta} (x) t, f_0 = x_theta (x) t^{-1},
h_0 = [e_0, f_0] = c - h_theta.

Everything here is immutable after construction; operations are pure.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from imverma._kernels import nullspace, rank
from imverma.errors import (AutomorphismError, ContextMismatchError, ImvermaError,
                            NotARootError)
from imverma.finite import (DiagramAutomorphism, FiniteAlgebra, FiniteElement,
                            _neg, root_height)


@dataclass(frozen=True)
class AffineRoot:
    """finite part (integer tuple over alpha_1..alpha_N) plus n*delta."""

    finite: tuple
    n: int

    def __neg__(self):
        return AffineRoot(tuple(-x for x in self.finite), -self.n)

    def __add__(self, other):
        return AffineRoot(tuple(a + b for a, b in zip(self.finite, other.finite)),
                          self.n + other.n)

    def is_zero(self):
        return self.n == 0 and all(x == 0 for x in self.finite)


@dataclass
class LoopElement:
    """Finite sparse sum of (basis element (x) t^n) terms plus c and d parts."""

    algebra: "AffineAlgebra"
    terms: dict = field(default_factory=dict)
    c: Fraction = Fraction(0)
    d: Fraction = Fraction(0)

    def _check(self, other):
        if self.algebra is not other.algebra:
            raise ContextMismatchError("loop elements from different algebra contexts")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            w = out.get(k, 0) + v
            if w:
                out[k] = w
            else:
                out.pop(k, None)
        return LoopElement(self.algebra, out, self.c + other.c, self.d + other.d)

    def __neg__(self):
        return LoopElement(self.algebra, {k: -v for k, v in self.terms.items()},
                           -self.c, -self.d)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, scalar):
        scalar = Fraction(scalar)
        if not scalar:
            return LoopElement(self.algebra, {})
        return LoopElement(self.algebra, {k: scalar * v for k, v in self.terms.items()},
                           scalar * self.c, scalar * self.d)

    def __eq__(self, other):
        if not isinstance(other, LoopElement):
            return NotImplemented
        return (self.algebra is other.algebra and self.terms == other.terms
                and self.c == other.c and self.d == other.d)

    def is_zero(self):
        return not self.terms and not self.c and not self.d

    def max_abs_degree(self):
        return max((abs(n) for (_, n) in self.terms), default=0)

    def __repr__(self):
        from imverma.finite import key_name
        bits = [f"{v}*{key_name(k)}@t^{n}" for (k, n), v in sorted(
            self.terms.items(), key=lambda kv: (kv[0][1], str(kv[0][0])))]
        if self.c:
            bits.append(f"{self.c}*c")
        if self.d:
            bits.append(f"{self.d}*d")
        return " + ".join(bits) if bits else "0"


class AffineAlgebra:
    """Loop-realization context over a finite algebra."""

    def __init__(self, finite: FiniteAlgebra):
        self.finite = finite
        self.rank = finite.rank
        theta = finite.roots.theta
        self.theta = theta
        # h_0 = c - h_theta, realized and recorded rather than postulated;
        # [e_0, f_0] is checked against it in the test suite.
        self._h0_finite = -1 * finite.coroot(theta)

    # -- element factories -------------------------------------------------

    def zero(self):
        return LoopElement(self, {})

    def loop(self, x: FiniteElement, n: int) -> LoopElement:
        if x.algebra is not self.finite:
            raise ContextMismatchError("finite element from a different algebra context")
        return LoopElement(self, {(k, n): v for k, v in x.terms.items()})

    def c_elem(self):
        return LoopElement(self, {}, c=Fraction(1))

    def d_elem(self):
        return LoopElement(self, {}, d=Fraction(1))

    def e(self, i, n=0):
        """e_i (x) t^n for i in I_0; i = 0 gives the affine generator e_0 (n must be 0)."""
        if i == 0:
            if n != 0:
                raise ImvermaError("e_0 is a fixed generator; no extra loop degree")
            return self.loop(self.finite.root_vector(_neg(self.theta)), 1)
        return self.loop(self.finite.e(i), n)

    def f(self, i, n=0):
        if i == 0:
            if n != 0:
                raise ImvermaError("f_0 is a fixed generator; no extra loop degree")
            return self.loop(self.finite.root_vector(self.theta), -1)
        return self.loop(self.finite.f(i), n)

    def h(self, i, n=0):
        if i == 0:
            if n != 0:
                raise ImvermaError("h_0 is a fixed generator; no extra loop degree")
            return self.loop(self._h0_finite, 0) + self.c_elem()
        return self.loop(self.finite.h(i), n)

    def affine_cartan_entry(self, i, j):
        """a_ij of the affine matrix, indices 0..N."""
        fin = self.finite
        if i >= 1 and j >= 1:
            return fin.cartan[i - 1, j - 1]
        theta = self.theta
        if i == 0 and j == 0:
            return 2
        if i == 0:
            # alpha_j(h_0) = -<alpha_j, theta^vee> since h_0 = c - h_theta
            return -self._alpha_on_coroot(j, theta)
        # j == 0: alpha_0(h_i) = -theta(h_i)
        return -fin.roots.pairing(theta, i - 1)

    def _alpha_on_coroot(self, j, gamma):
        # alpha_j(h_gamma) = 2 (alpha_j|gamma)/(gamma|gamma)
        fin = self.finite
        aj = fin.roots.simple_roots[j - 1]
        val = 2 * fin.root_form(aj, gamma) / fin.root_form(gamma, gamma)
        if val.denominator != 1:
            raise ImvermaError("non-integral affine Cartan entry")
        return int(val)

    # -- roots ---------------------------------------------------------------

    def alpha0(self):
        return AffineRoot(_neg(self.theta), 1)

    def delta(self):
        return AffineRoot(tuple(0 for _ in range(self.rank)), 1)

    def is_affine_root(self, r: AffineRoot) -> bool:
        zero = all(x == 0 for x in r.finite)
        if zero:
            return r.n != 0
        return r.finite in self.finite.roots.root_set

    def classify_root(self, r: AffineRoot) -> str:
        if not self.is_affine_root(r):
            raise NotARootError(f"{r} is not an affine root")
        return "imaginary" if all(x == 0 for x in r.finite) else "real"

    def roots_in_window(self, height, degree):
        """All affine roots with |finite height| <= height and |n| <= degree."""
        out = []
        fins = [g for g in self.finite.roots.root_set if abs(root_height(g)) <= height]
        fins.append(tuple(0 for _ in range(self.rank)))
        for g in sorted(fins):
            for n in range(-degree, degree + 1):
                r = AffineRoot(g, n)
                if not r.is_zero() and self.is_affine_root(r):
                    out.append(r)
        return out

    def root_weight_on_h(self, r: AffineRoot, i):
        """r evaluated on h_i (i in 1..N); the delta part vanishes on h_i."""
        return self.finite.roots.pairing(r.finite, i - 1)


def affine_bracket(a: LoopElement, b: LoopElement) -> LoopElement:
    """The loop-realization bracket, including central term and d-grading."""
    if a.algebra is not b.algebra:
        raise ContextMismatchError("loop elements from different algebra contexts")
    alg = a.algebra
    fin = alg.finite
    terms = {}
    c_out = Fraction(0)

    def add_term(key, n, coeff):
        if not coeff:
            return
        k = (key, n)
        w = terms.get(k, 0) + coeff
        if w:
            terms[k] = w
        else:
            del terms[k]

    for (k1, n1), c1 in a.terms.items():
        for (k2, n2), c2 in b.terms.items():
            coeff = c1 * c2
            for k, c in fin._bracket_table[(k1, k2)].items():
                add_term(k, n1 + n2, coeff * c)
            if n1 == -n2 and n1 != 0:
                c_out += coeff * n1 * fin.form_keys(k1, k2)
    if a.d:
        for (k2, n2), c2 in b.terms.items():
            add_term(k2, n2, a.d * n2 * c2)
    if b.d:
        for (k1, n1), c1 in a.terms.items():
            add_term(k1, n1, -b.d * n1 * c1)
    return LoopElement(alg, terms, c=c_out)


# -- closed partitions ---------------------------------------------------------


def natural_partition_contains(algebra: AffineAlgebra, r: AffineRoot) -> bool:
    """alpha + n*delta for positive alpha (any n), plus k*delta for k > 0."""
    if not algebra.is_affine_root(r):
        raise NotARootError(f"{r} is not an affine root")
    if all(x == 0 for x in r.finite):
        return r.n > 0
    return r.finite in algebra.finite.roots.positive_set


def standard_partition_contains(algebra: AffineAlgebra, r: AffineRoot) -> bool:
    """alpha + n*delta for n > 0 (any alpha), plus positive alpha at n = 0."""
    if not algebra.is_affine_root(r):
        raise NotARootError(f"{r} is not an affine root")
    if r.n > 0:
        return True
    if r.n == 0:
        return r.finite in algebra.finite.roots.positive_set
    return False


@dataclass
class ClosedPartitionSpec:
    """Membership predicate for a candidate closed partition.

    For the named partitions the predicate is global; a custom partition is an
    explicit root list trusted only inside its declared window.
    """

    algebra: AffineAlgebra
    name: str
    _predicate: object
    window: tuple = None  # (height, degree) for custom sets

    def contains(self, r: AffineRoot) -> bool:
        if self.window is not None:
            h, deg = self.window
            if abs(root_height(r.finite)) > h or abs(r.n) > deg:
                raise ImvermaError(f"root {r} outside the declared window of custom "
                                   f"partition {self.name!r}")
        return self._predicate(r)


def natural_spec(algebra) -> ClosedPartitionSpec:
    return ClosedPartitionSpec(algebra, "natural",
                               lambda r: natural_partition_contains(algebra, r))


def standard_spec(algebra) -> ClosedPartitionSpec:
    return ClosedPartitionSpec(algebra, "standard",
                               lambda r: standard_partition_contains(algebra, r))


def custom_spec(algebra, roots, height, degree, name="custom") -> ClosedPartitionSpec:
    rootset = set(roots)
    return ClosedPartitionSpec(algebra, name, lambda r: r in rootset,
                               window=(height, degree))


def check_closed_partition(spec: ClosedPartitionSpec, height, degree) -> dict:
    """Windowed closed-partition report.

    Checks, over all affine roots with |finite height| <= height and
    |n| <= degree: S(r) xor S(-r) for every root, and closure under addition
    for every pair of members whose sum is again a root. Sums escaping the
    window are counted as skipped, never as failures.
    """
    alg = spec.algebra
    window_roots = alg.roots_in_window(height, degree)
    violations = []
    members = []
    for r in window_roots:
        in_s = spec.contains(r)
        in_neg = spec.contains(-r)
        if in_s == in_neg:
            axiom = "disjointness" if in_s else "covering"
            violations.append({"axiom": axiom, "witness": [_root_record(r)]})
        if in_s:
            members.append(r)
    skipped = 0
    inside = {(r.finite, r.n) for r in window_roots}
    for i, r1 in enumerate(members):
        for r2 in members[i:]:
            s = r1 + r2
            if s.is_zero() or not alg.is_affine_root(s):
                continue
            if (s.finite, s.n) not in inside:
                skipped += 1
                continue
            if not spec.contains(s):
                violations.append({"axiom": "closure",
                                   "witness": [_root_record(r1), _root_record(r2)]})
    return {
        "partition": spec.name,
        "window": {"height": height, "loop_degree": degree},
        "roots_checked": len(window_roots),
        "skipped_sums": skipped,
        "violations": violations,
        "passed": not violations,
    }


def _root_record(r: AffineRoot):
    return {"finite": list(r.finite), "delta": r.n}


# -- order-2 twisted fixed-point subalgebras -----------------------------------


class TwistedSubalgebra:
    """Graded fixed-point subalgebra of an order-2 twist of the loop algebra.

    Degree m carries mu_0 (x) t^m for even m and mu_1 (x) t^m for odd m, where
    mu_0 / mu_1 are the +1 / -1 eigenspaces of the diagram automorphism on the
    finite algebra; c and d are adjoined at degree 0.
    """

    def __init__(self, algebra: AffineAlgebra, aut: DiagramAutomorphism, window: int):
        if aut.algebra is not algebra.finite:
            raise ContextMismatchError("automorphism belongs to a different algebra")
        if aut.order != 2:
            raise AutomorphismError(
                f"twisted construction needs an order-2 automorphism, got order {aut.order}")
        if window < 0:
            raise ImvermaError("degree window must be non-negative")
        self.algebra = algebra
        self.aut = aut
        self.window = window
        fin = algebra.finite
        m = aut.matrix()
        dim = fin.dimension
        self.even_basis = self._eigenbasis(m, Fraction(1))
        self.odd_basis = self._eigenbasis(m, Fraction(-1))
        if len(self.even_basis) + len(self.odd_basis) != dim:
            raise ImvermaError("eigenspaces do not span; automorphism is not semisimple?")

    def _eigenbasis(self, m, eigval):
        fin = self.algebra.finite
        dim = fin.dimension
        rows = [[m[i][j] - (eigval if i == j else 0) for j in range(dim)]
                for i in range(dim)]
        vecs = nullspace(rows, dim)
        out = []
        for v in vecs:
            out.append(fin.element({fin.basis[i]: v[i] for i in range(dim) if v[i]}))
        return out

    def graded_basis(self, m: int):
        """Basis of the degree-m piece as loop elements."""
        if abs(m) > self.window:
            raise ImvermaError(f"degree {m} outside window {self.window}")
        fin_basis = self.even_basis if m % 2 == 0 else self.odd_basis
        return [self.algebra.loop(x, m) for x in fin_basis]

    def graded_dimension(self, m: int) -> int:
        return len(self.even_basis) if m % 2 == 0 else len(self.odd_basis)

    def _finite_coords(self, x: FiniteElement):
        fin = self.algebra.finite
        return [x.terms.get(k, Fraction(0)) for k in fin.basis]

    def check_bracket_closure(self) -> dict:
        """Verify [piece_m, piece_m'] lands in piece_{m+m'} + C c inside the window."""
        failures = []
        checked = 0
        for m in range(-self.window, self.window + 1):
            for mp in range(m, self.window + 1):
                if abs(m + mp) > self.window:
                    continue
                target = self.even_basis if (m + mp) % 2 == 0 else self.odd_basis
                target_rows = [self._finite_coords(x) for x in target]
                base_rank = rank(target_rows)
                for u in self.graded_basis(m):
                    for v in self.graded_basis(mp):
                        w = affine_bracket(u, v)
                        checked += 1
                        if w.d:
                            failures.append({"degrees": [m, mp], "reason": "d component"})
                            continue
                        fin_terms = {}
                        for (k, n), cv in w.terms.items():
                            if n != m + mp:
                                failures.append({"degrees": [m, mp],
                                                 "reason": f"stray degree {n}"})
                                break
                            fin_terms[k] = cv
                        else:
                            x = self.algebra.finite.element(fin_terms)
                            if not x.is_zero():
                                if rank(target_rows + [self._finite_coords(x)]) != base_rank:
                                    failures.append({"degrees": [m, mp],
                                                     "reason": "image outside eigenspace"})
        return {"checked_brackets": checked, "failures": failures,
                "passed": not failures}

    def natural_borel_slice_dims(self) -> dict:
        """dim of (fixed-point set  intersect  b_nat) per degree in the window.

        b_nat has n_+ + h at degrees >= 0 and n_+ only at degrees < 0; c and d
        (degree 0) are fixed by the twist and counted there.
        """
        fin = self.algebra.finite
        pos_keys = [("x", g) for g in fin.roots.positive_roots]
        h_keys = [("h", i + 1) for i in range(fin.rank)]
        dims = {}
        for m in range(-self.window, self.window + 1):
            keys = pos_keys + h_keys if m >= 0 else pos_keys
            slice_rows = []
            for k in keys:
                row = [Fraction(0)] * fin.dimension
                row[fin.basis_index[k]] = Fraction(1)
                slice_rows.append(row)
            eig = self.even_basis if m % 2 == 0 else self.odd_basis
            eig_rows = [self._finite_coords(x) for x in eig]
            inter = len(slice_rows) + len(eig_rows) - rank(slice_rows + eig_rows)
            dims[m] = inter + (2 if m == 0 else 0)  # c and d at degree 0
        return dims


def twisted_fixed_subalgebra(algebra: AffineAlgebra, aut: DiagramAutomorphism,
                             window: int) -> TwistedSubalgebra:
    return TwistedSubalgebra(algebra, aut, window)
