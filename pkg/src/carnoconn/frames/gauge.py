"""Symbol gauge normalization of the word frame, and the flat-reference
curvature readout.

The raw word frame realizes the symbol only at the base point.  A
within-layer jet correction M = I + W (W vanishing at the base point,
trivial on the horizontal layer) is solved order by order so that the
nilpotentized structure functions of the corrected frame equal the
symbol's structure constants identically in the jet ring.  Because the
horizontal frame is declared orthonormal and deeper Grams are induced by
the brackets, matching the constants forces the Grams to match too; the
result is an exact local section of the isometry bundle.

With that section U fixed, the flat reference connection (all frame
fields parallel) has curvature

    kt(A_b, A_c) = [A_b, A_c] - sum_a c~^a_{bc}(x) A_a,

whose components are pure g_minus values of strictly positive
homogeneity; its degree-one slice feeds the abstract solver.
"""

from __future__ import annotations

from ..cochain import Cochain, ComplexOperators
from ..linalg import Mat, decompose, gram_pinv, IPSpace, solve as lin_solve
from ..jets import Jet, jet_matvec, jet_matmul
from ..rat import Rat, ZERO, ONE, rat
from .spec import FrameError, MovingFrame, SymbolMismatch


class GaugeError(FrameError):
    pass


class NormalizedFrame:
    """Word frame corrected to a jet-exact section of the isometry bundle."""

    def __init__(self, mf: MovingFrame):
        self.mf = mf
        self.alg = mf.alg
        self.arena = mf.arena
        n = mf.frame.n
        self._slots = [
            (a, b)
            for a in range(n)
            for b in range(n)
            if mf.layer_of_word[a] == mf.layer_of_word[b]
            and mf.layer_of_word[a] >= 2
        ]
        self._jac = self._linearization()
        self._solve_gauge()
        self._structure = None

    # -- gauge solve -------------------------------------------------------
    def _pairs(self):
        alg = self.alg
        n = alg.n
        return [
            (b, c)
            for b in range(n)
            for c in range(b + 1, n)
            if alg.layer_of[b] + alg.layer_of[c] <= alg.step
        ]

    def _rows(self):
        alg = self.alg
        out = []
        for (b, c) in self._pairs():
            depth = alg.layer_of[b] + alg.layer_of[c]
            for e in alg.layer_indices(depth):
                out.append((b, c, e))
        return out

    def _linearization(self):
        """Constant Jacobian of the top-layer structure residual in the
        within-layer correction entries."""
        alg = self.alg
        slots = self._slots
        slot_index = {s: i for i, s in enumerate(slots)}
        rows = []
        for (b, c, e) in self._rows():
            row = [ZERO] * len(slots)
            for (x, y), si in slot_index.items():
                # dc~^e_{bc} / dW[x, y]
                v = ZERO
                if y == b:
                    v += alg.brk[x][c].get(e, ZERO)
                if y == c:
                    v += alg.brk[b][x].get(e, ZERO)
                if x == e:
                    v -= alg.brk[b][c].get(y, ZERO)
                if v:
                    row[si] = v
            rows.append(row)
        m = Mat(rows) if rows else Mat.zeros(0, len(slots))
        dec = decompose(m)
        if dec.kernel_basis.cols:
            raise GaugeError(
                "gauge linearization has a kernel; symbol normalization "
                "is not unique"
            )
        self._jac_solver = gram_pinv(
            m, IPSpace.standard(m.cols), IPSpace.standard(m.rows)
        )
        return m

    def _corrected_structure(self, w):
        """Structure functions of the corrected frame Y.(I + W) and the
        corrected frame's coordinate jets."""
        mf = self.mf
        ar = self.arena
        n = mf.frame.n
        eye = [
            [ar.const(1) if i == j else ar.zero() for j in range(n)]
            for i in range(n)
        ]
        m = [[eye[i][j] + w[i][j] for j in range(n)] for i in range(n)]
        # inverse by the finite Neumann series (W vanishes at the base point)
        minv = eye
        power = [[w[i][j] for j in range(n)] for i in range(n)]
        for k in range(ar.cap):
            if all(e.is_zero() for row in power for e in row):
                break
            sign = -ONE if k % 2 == 0 else ONE
            minv = [
                [minv[i][j] + sign * power[i][j] for j in range(n)]
                for i in range(n)
            ]
            power = jet_matmul(power, [[w[i][j] for j in range(n)] for i in range(n)])
        word_jets = [ar.of_polyvec(wd.field) for wd in mf.words]
        struct = mf.structure
        ctilde = {}
        for b in range(n):
            for c in range(b + 1, n):
                v = [ar.zero() for _ in range(n)]
                for p in range(n):
                    mpb = m[p][b]
                    if mpb.is_zero():
                        continue
                    for q in range(n):
                        mqc = m[q][c]
                        if mqc.is_zero() or (p == q):
                            continue
                        f = mpb * mqc
                        for a in range(n):
                            sa = struct[p][q][a]
                            if not sa.is_zero():
                                v[a] = v[a] + f * sa
                # derivative terms: Y~_b(M[a,c]) - Y~_c(M[a,b])
                for a in range(n):
                    da = ar.zero()
                    for p in range(n):
                        if not m[p][b].is_zero():
                            d = self._dirderiv(word_jets[p], m[a][c])
                            da = da + m[p][b] * d
                        if not m[p][c].is_zero():
                            d = self._dirderiv(word_jets[p], m[a][b])
                            da = da - m[p][c] * d
                    v[a] = v[a] + da
                ctilde[(b, c)] = jet_matvec(minv, v)
        return ctilde, m, minv

    def _dirderiv(self, field_jets, f):
        out = None
        for i, comp in enumerate(field_jets):
            if comp.is_zero():
                continue
            t = comp * f.diff(i)
            out = t if out is None else out + t
        return out if out is not None else self.arena.zero()

    def _solve_gauge(self):
        mf = self.mf
        ar = self.arena
        n = mf.frame.n
        slots = self._slots
        w = [[ar.zero() for _ in range(n)] for _ in range(n)]
        rows = self._rows()
        for order in range(1, ar.cap + 1):
            ctilde, _, _ = self._corrected_structure(w)
            # order-m coefficients of the top-layer residual, per monomial
            residual = {}
            for ridx, (b, c, e) in enumerate(rows):
                jet = ctilde[(b, c)][e]
                target = self.alg.brk[b][c].get(e, ZERO)
                for exps, coeff in jet.terms.items():
                    if sum(exps) != order:
                        continue
                    residual.setdefault(exps, [ZERO] * len(rows))[ridx] = coeff
                if target and order == 0:
                    pass
            for exps, rvec in residual.items():
                sol = self._jac_solver.matvec([-x for x in rvec])
                check = self._jac.matvec(sol)
                if any(a - b for a, b in zip(check, [-x for x in rvec])):
                    raise GaugeError(
                        "gauge correction inconsistent at order %d" % order
                    )
                for si, (a, b) in enumerate(slots):
                    if sol[si]:
                        w[a][b] = w[a][b] + Jet(
                            n, ar.cap, {exps: sol[si]}, None
                        )
        ctilde, m, minv = self._corrected_structure(w)
        for (b, c, e) in rows:
            jet = ctilde[(b, c)][e]
            target = self.alg.brk[b][c].get(e, ZERO)
            diff = jet - Jet.const(n, ar.cap, target)
            if not diff.is_zero():
                raise GaugeError("gauge normalization failed to converge")
        self.w = w
        self.m = m
        self.m_inv = minv
        self.ctilde = ctilde

    # -- corrected frame data ----------------------------------------------
    @property
    def structure(self):
        """Full structure functions of the normalized frame (jets)."""
        if self._structure is None:
            n = self.mf.frame.n
            s = [[None] * n for _ in range(n)]
            for b in range(n):
                for c in range(b + 1, n):
                    s[b][c] = self.ctilde[(b, c)]
                    s[c][b] = [-x for x in self.ctilde[(b, c)]]
                s[b][b] = [self.arena.zero() for _ in range(n)]
            self._structure = s
        return self._structure

    def field_coeffs(self, idx):
        """Coordinate jets of the normalized frame field with index idx."""
        word_jets = [self.arena.of_polyvec(w.field) for w in self.mf.words]
        n = self.mf.frame.n
        return [
            sum(
                (self.m[p][idx] * word_jets[p][i] for p in range(n)),
                self.arena.zero(),
            )
            for i in range(n)
        ]

    def kappa_tilde(self, ops: ComplexOperators):
        """Flat-reference curvature as jet coefficients over the c^2 basis."""
        alg = self.alg
        n = alg.n
        s2 = ops.spaces[2]
        out = [self.arena.zero() for _ in range(s2.dim)]
        for b in range(n):
            for c in range(b + 1, n):
                cvals = self.ctilde[(b, c)]
                sym = alg.brk[b][c]
                for a in range(n):
                    coeff = Jet.const(n, self.arena.cap, sym.get(a, ZERO)) - cvals[a]
                    if not coeff.is_zero():
                        out[s2.flat(a, (b, c))] = coeff
        return out

    def kappa_tilde_deg1(self, ops: ComplexOperators):
        """Degree-one slice of the flat-reference curvature (jets)."""
        full = self.kappa_tilde(ops)
        s2 = ops.spaces[2]
        sl = set(s2.slice_indices(1))
        return [
            v if i in sl else self.arena.zero() for i, v in enumerate(full)
        ]
