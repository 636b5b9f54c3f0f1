"""Polynomial frame models: growth vector, bracket words, and the moving
frame expansion machinery everything downstream runs on.

All bundle-level objects are gauge-fixed to a chosen local frame.  The
word frame consists of iterated brackets of the horizontal fields; its
coordinate matrix is inverted once over the jet ring at the base point
and every later computation expands vector fields over that frame.
"""

from __future__ import annotations

from ..carnot import CarnotAlgebra, CarnotSpec, build
from ..jets import Jet, JetArena, JetError, jet_matvec, jet_solve
from ..linalg import Mat, decompose
from ..poly import Poly, PolyVec, bracket
from ..rat import Rat, ZERO, ONE, rat


class FrameError(ValueError):
    pass


class NotBracketGenerating(FrameError):
    pass


class SymbolMismatch(FrameError):
    pass


class FrameSpec:
    """Manifold dimension, horizontal frame (declared g-orthonormal), base
    point, and the expected symbol algebra."""

    def __init__(self, n, horizontal, point, symbol):
        self.n = int(n)
        self.horizontal = list(horizontal)
        self.point = [rat(c) for c in point]
        if len(self.point) != self.n:
            raise FrameError("base point has wrong dimension")
        for f in self.horizontal:
            if f.n != self.n:
                raise FrameError("frame field has wrong dimension")
        self.symbol = symbol if isinstance(symbol, CarnotSpec) else CarnotSpec(**symbol)


class Word:
    """An iterated bracket word: depth, the exact polynomial field, and a
    readable derivation label."""

    __slots__ = ("depth", "field", "label")

    def __init__(self, depth, field, label):
        self.depth = depth
        self.field = field
        self.label = label


def growth_vector(frame: FrameSpec):
    """Realized growth vector (n_1, n_1+n_2, ...) of the bracket flag at
    the base point; raises NotBracketGenerating if the flag stalls before
    filling the tangent space."""
    mf = MovingFrame(frame, check_symbol=False)
    return mf.realized_growth


class MovingFrame:
    """Graded word frame at a base point with jet-valued expansions.

    After construction: `words` holds the chosen graded frame (n fields,
    layer by layer), `structure` the jet structure functions c^a_{bc}
    with [Y_b, Y_c] = sum_a c^a_{bc} Y_a, and `expand` turns any
    polynomial field (or jet component vector) into frame coefficients.
    """

    def __init__(self, frame: FrameSpec, cap=None, check_symbol=True):
        self.frame = frame
        self.alg = build(frame.symbol)
        n = frame.n
        if cap is None:
            cap = 6 if n <= 6 else 3
        self.arena = JetArena(n, cap, frame.point)
        if len(frame.horizontal) != self.alg.layer_dims[0]:
            raise SymbolMismatch(
                "expected %d horizontal fields, got %d"
                % (self.alg.layer_dims[0], len(frame.horizontal))
            )
        self._grow()
        if self.realized_growth != self._expected_growth():
            raise SymbolMismatch(
                "realized growth vector %r does not match symbol %r"
                % (self.realized_growth, self._expected_growth())
            )
        self._invert_frame()
        self._bracket_cache = {}
        self._structure = None
        if check_symbol:
            self.check_symbol_at_point()

    # -- flag construction -------------------------------------------------
    def _expected_growth(self):
        out = []
        total = 0
        for d in self.alg.layer_dims:
            total += d
            out.append(total)
        return tuple(out)

    def _grow(self):
        n = self.frame.n
        point = self.frame.point
        chosen = []  # words forming a basis of the flag at the base point
        chosen_cols = []
        rank = 0
        growth = []
        layer_words = [
            [Word(1, f, "X%d" % (i + 1)) for i, f in enumerate(self.frame.horizontal)]
        ]
        max_depth = max(2 * self.alg.step, self.alg.step + 2)
        depth = 1
        while True:
            new_chosen = []
            for w in layer_words[-1]:
                col = w.field.eval(point)
                cand = Mat.from_cols(chosen_cols + [col], n)
                if decompose(cand).rank > rank:
                    chosen_cols.append(col)
                    chosen.append(w)
                    new_chosen.append(w)
                    rank += 1
            growth.append(rank)
            if rank == n:
                break
            if depth >= max_depth or not new_chosen:
                raise NotBracketGenerating(
                    "bracket flag stalls at rank %d of %d" % (rank, n)
                )
            nxt = []
            for xi, x in enumerate(self.frame.horizontal):
                for w in new_chosen:
                    nxt.append(
                        Word(
                            depth + 1,
                            bracket(x, w.field),
                            "[X%d,%s]" % (xi + 1, w.label),
                        )
                    )
            layer_words.append(nxt)
            depth += 1
        # collapse equal trailing ranks (equiregular growth readout)
        self.realized_growth = tuple(growth)
        self.words = chosen
        self.layer_of_word = [w.depth for w in chosen]
        self.layer_start = []
        pos = 0
        for d in range(1, max(self.layer_of_word) + 1):
            self.layer_start.append(pos)
            pos += sum(1 for w in chosen if w.depth == d)

    def layer_indices(self, depth):
        return [i for i, w in enumerate(self.words) if w.depth == depth]

    # -- jet expansion machinery --------------------------------------------
    def _invert_frame(self):
        ar = self.arena
        cmat = [
            [ar.of_poly(w.field.components[i]) for w in self.words]
            for i in range(self.frame.n)
        ]
        try:
            inv_cols = jet_solve(
                cmat,
                [
                    [
                        ar.const(1) if i == j else ar.zero()
                        for i in range(self.frame.n)
                    ]
                    for j in range(self.frame.n)
                ],
            )
        except JetError as e:
            raise FrameError("word frame is singular at the base point: %s" % e)
        # inv[i][j]: row i of C^-1 applied later via jet_matvec
        self.frame_inv = [
            [inv_cols[j][i] for j in range(self.frame.n)]
            for i in range(self.frame.n)
        ]

    def expand_jets(self, comps):
        """Frame coefficients of a field given by jet coordinate components."""
        return jet_matvec(self.frame_inv, comps)

    def expand_field(self, field: PolyVec):
        return self.expand_jets(self.arena.of_polyvec(field))

    def word_bracket(self, a, b):
        """Exact polynomial bracket of chosen words a and b (antisymmetric cache)."""
        if a == b:
            return PolyVec.zero(self.frame.n)
        key = (min(a, b), max(a, b))
        if key not in self._bracket_cache:
            self._bracket_cache[key] = bracket(
                self.words[key[0]].field, self.words[key[1]].field
            )
        f = self._bracket_cache[key]
        return f if a < b else f.scale(-1)

    @property
    def structure(self):
        """structure[b][c] = list of jet coefficients over the word frame."""
        if self._structure is None:
            n = self.frame.n
            self._structure = [[None] * n for _ in range(n)]
            for b in range(n):
                for c in range(b + 1, n):
                    co = self.expand_field(self.word_bracket(b, c))
                    self._structure[b][c] = co
                    self._structure[c][b] = [-x for x in co]
                zero = [self.arena.zero() for _ in range(n)]
                self._structure[b][b] = zero
        return self._structure

    # -- nilpotentization at the base point ----------------------------------
    def graded_constants_at_point(self):
        """Structure constants of the nilpotentization at the base point in
        the chosen word frame: only the top-layer coefficients of each
        bracket survive the quotients."""
        n = self.frame.n
        out = {}
        for b in range(n):
            for c in range(b + 1, n):
                depth = self.layer_of_word[b] + self.layer_of_word[c]
                if depth > self.alg.step:
                    continue
                tgt = {}
                for a in self.layer_indices(depth):
                    v = self.structure[b][c][a].value()
                    if v:
                        tgt[a] = v
                out[(b, c)] = tgt
        return out

    def check_symbol_at_point(self):
        """Identity-correspondence symbol check: the realized nilpotent
        structure constants and induced layer Grams at the base point must
        equal the declared symbol's, under word-order identification.

        When the constants differ, a basis-independent invariant (the
        characteristic polynomial of the squared bracket operator per
        layer) is compared to produce a definitive mismatch message where
        possible; fixtures are chosen so this decides rationally.
        """
        alg = self.alg
        if [len(self.layer_indices(d)) for d in range(1, alg.step + 1)] != list(
            alg.layer_dims
        ):
            raise SymbolMismatch("layer dimensions differ from the declared symbol")
        got = self.graded_constants_at_point()
        want = {}
        for i in range(alg.n):
            for j in range(i + 1, alg.n):
                if alg.layer_of[i] + alg.layer_of[j] <= alg.step:
                    want[(i, j)] = alg.brk[i][j]
        if got == want:
            return
        if self._bracket_invariants(got) != self._bracket_invariants(want):
            raise SymbolMismatch(
                "nilpotentization is not isometric to the declared symbol "
                "(bracket operator invariants differ)"
            )
        raise SymbolMismatch(
            "realized structure constants differ from the declared symbol in "
            "the natural word-frame correspondence; no exact rational "
            "isometry was identified"
        )

    def _bracket_invariants(self, constants):
        """Char. polynomial of L^T L for the layer-2 bracket map, computed
        with the declared g_-1 gram (the frame is declared orthonormal)."""
        alg = self.alg
        idx1 = self.layer_indices(1)
        pairs = [(p, q) for p in idx1 for q in idx1 if p < q]
        idx2 = self.layer_indices(2)
        lmat = Mat.zeros(len(idx2), len(pairs))
        for cidx, (p, q) in enumerate(pairs):
            tgt = constants.get((p, q), {})
            for r, a in enumerate(idx2):
                lmat.a[r][cidx] = tgt.get(a, ZERO)
        prod = lmat @ lmat.transpose()
        return _char_poly(prod)


def _char_poly(m: Mat):
    """Characteristic polynomial coefficients by the Faddeev-LeVerrier
    recursion, exact."""
    n = m.rows
    coeffs = [ONE]
    a = Mat.zeros(n, n)
    ident = Mat.identity(n)
    for k in range(1, n + 1):
        a = m @ (a + ident.scale(coeffs[-1])) if k > 1 else Mat([row[:] for row in m.a])
        tr = sum((a.a[i][i] for i in range(n)), ZERO)
        coeffs.append(-tr / k)
    return coeffs
