import random

import numpy as np
import pytest

from cokfluct import (
    BlockStructureError,
    DivisorValuations,
    IntMatrix,
    PadicMatrix,
    cokernel_partition,
    padic_valuations,
    reduce_matrix,
    snf_diagonal,
    streaming_block_eliminate,
)
from cokfluct.exact_linalg import det_bareiss, rational_rank
from helpers import (
    det_cofactor,
    random_elementary_ops,
    random_int_matrix,
    snf_via_minor_gcds,
)


class TestSnfDiagonal:
    def test_identity(self):
        assert snf_diagonal(IntMatrix.identity(2)) == [1, 1]

    @pytest.mark.parametrize(
        "rows,expected",
        [
            ([[2, 0], [1, 3]], [1, 6]),   # gcd 1, |det| 6
            ([[4, 2], [2, 4]], [2, 6]),   # gcd 2, |det| 12
        ],
    )
    def test_small_examples_against_minor_oracle(self, rows, expected):
        m = IntMatrix.from_rows(rows)
        assert snf_via_minor_gcds(m) == expected
        assert snf_diagonal(m) == expected

    def test_random_against_minor_oracle(self):
        rng = random.Random(1)
        for _ in range(60):
            n = rng.randint(1, 4)
            m = random_int_matrix(rng, n)
            assert snf_diagonal(m) == snf_via_minor_gcds(m)

    def test_rectangular(self):
        m = IntMatrix.from_rows([[2, 4, 6]])
        assert snf_diagonal(m) == [2]
        m = IntMatrix.from_rows([[0, 0], [0, 0], [3, 0]])
        assert snf_diagonal(m) == [3, 0]

    def test_divisibility_chain_and_det(self):
        rng = random.Random(2)
        for _ in range(40):
            n = rng.randint(2, 4)
            m = random_int_matrix(rng, n)
            diag = snf_diagonal(m)
            for a, b in zip(diag, diag[1:]):
                assert b % a == 0 if a else b == 0
            det = det_cofactor(m.to_rows())
            if det:
                prod = 1
                for d in diag:
                    prod *= d
                assert prod == abs(det)

    def test_unimodular_invariance(self):
        rng = random.Random(3)
        for _ in range(25):
            n = rng.randint(2, 4)
            m = random_int_matrix(rng, n)
            rows = random_elementary_ops(rng, m.to_rows(), rng.randint(1, 20), "row")
            rows = random_elementary_ops(rng, rows, rng.randint(1, 20), "col")
            assert snf_diagonal(IntMatrix.from_rows(rows)) == snf_diagonal(m)


class TestBareissHelpers:
    def test_det_matches_cofactor_expansion(self):
        rng = random.Random(21)
        for _ in range(60):
            m = random_int_matrix(rng, rng.randint(1, 4))
            assert det_bareiss(m) == det_cofactor(m.to_rows())

    def test_rank_matches_snf_nonzero_count(self):
        rng = random.Random(22)
        for _ in range(60):
            m = random_int_matrix(rng, rng.randint(1, 4))
            assert rational_rank(m) == sum(1 for d in snf_diagonal(m) if d)

    def test_rank_deficient(self):
        m = IntMatrix.from_rows([[1, 2, 3], [2, 4, 6], [0, 0, 1]])
        assert rational_rank(m) == 2
        assert det_bareiss(m) == 0


class TestCokernelPartition:
    def test_diagonal_examples(self):
        m = IntMatrix.from_rows([[2, 0], [0, 8]])
        assert cokernel_partition(m, 2) == ((3, 1), 0)
        assert cokernel_partition(m, 3) == ((), 0)

    def test_via_snf_oracle(self):
        m = IntMatrix.from_rows([[2, 0], [1, 3]])
        assert snf_via_minor_gcds(m) == [1, 6]
        assert cokernel_partition(m, 2) == ((1,), 0)

    def test_free_rank_reported_separately(self):
        m = IntMatrix.from_rows([[2, 0], [0, 0]])
        assert cokernel_partition(m, 2) == ((1,), 1)

    def test_square_required(self):
        with pytest.raises(ValueError):
            cokernel_partition(IntMatrix.from_rows([[1, 2]]), 2)


class TestPadicValuations:
    def test_diag_full_precision(self):
        m = reduce_matrix(IntMatrix.from_rows([[2, 0], [0, 8]]), 2, 16)
        assert padic_valuations(m) == DivisorValuations((1, 3), 0)

    def test_diag_saturates_at_low_precision(self):
        m = reduce_matrix(IntMatrix.from_rows([[2, 0], [0, 8]]), 2, 2)
        assert padic_valuations(m) == DivisorValuations((1,), 1)

    def test_random_5x5_mod_2_32_matches_exact(self):
        # beyond the int64-safe window: exercises the uint64 wraparound path
        rng = random.Random(4)
        done = 0
        while done < 10:
            m = random_int_matrix(rng, 5)
            if det_cofactor(m.to_rows()) == 0:
                continue
            done += 1
            part, free = cokernel_partition(m, 2)
            dv = padic_valuations(reduce_matrix(m, 2, 32))
            assert free == 0
            assert dv.saturated_count == 0
            assert dv.partition() == part

    def test_lift_consistency_various_primes(self):
        rng = random.Random(5)
        for p in (2, 3, 5):
            for _ in range(10):
                n = rng.randint(1, 4)
                m = random_int_matrix(rng, n)
                dv = padic_valuations(reduce_matrix(m, p, 16))
                if dv.saturated_count == 0:
                    part, free = cokernel_partition(m, p)
                    assert free == 0
                    assert dv.partition() == part

    def test_arithmetic_backends_agree(self):
        # int64 (N=16, p=2), uint64 wraparound (N=40, p=2), and object
        # (any N at p=3, and N=128 at p=2) must produce identical data
        rng = random.Random(6)
        for _ in range(10):
            m = random_int_matrix(rng, 4)
            small = padic_valuations(reduce_matrix(m, 2, 16))    # int64
            wrap = padic_valuations(reduce_matrix(m, 2, 40))     # uint64
            wide = padic_valuations(reduce_matrix(m, 2, 128))    # object
            assert reduce_matrix(m, 2, 16).data.dtype == np.int64
            assert reduce_matrix(m, 2, 40).data.dtype == np.uint64
            assert reduce_matrix(m, 2, 128).data.dtype == object
            if small.saturated_count == 0:
                assert small.valuations == wrap.valuations == wide.valuations
        for _ in range(6):
            m = random_int_matrix(rng, 3)
            a = padic_valuations(reduce_matrix(m, 3, 12))        # int64
            b = padic_valuations(reduce_matrix(m, 3, 50))        # object
            if a.saturated_count == 0:
                assert a.valuations == b.valuations


class TestPadicMatrix:
    def test_entry_range_validated(self):
        with pytest.raises(ValueError):
            PadicMatrix([[4]], 2, 2)
        with pytest.raises(ValueError):
            PadicMatrix([[-1]], 2, 2)

    def test_data_read_only(self):
        m = PadicMatrix([[1]], 2, 4)
        with pytest.raises(ValueError):
            m.data[0, 0] = 0


class TestStreamingBlockEliminate:
    def test_k2_example_matches_oracle(self):
        # assembled matrix [[2, 0], [1, 3]]
        full = reduce_matrix(IntMatrix.from_rows([[2, 0], [1, 3]]), 2, 16)
        oracle = padic_valuations(full)
        got = streaming_block_eliminate(full, [1, 1])
        assert got == oracle
        assert got.partition() == (1,)
        assert got.saturated_count == 0

    def test_single_block_degenerate(self):
        m = reduce_matrix(IntMatrix.from_rows([[6, 2], [4, 8]]), 2, 16)
        assert streaming_block_eliminate(m, [2]) == padic_valuations(m)

    @pytest.mark.parametrize("p", [2, 3])
    def test_random_block_lower_triangular(self, p):
        rng = random.Random(100 + p)
        for _ in range(20):
            k = rng.randint(1, 5)
            sizes = [rng.randint(1, 4) for _ in range(k)]
            offs = [0]
            for s in sizes:
                offs.append(offs[-1] + s)
            n = offs[-1]
            rows = [[0] * n for _ in range(n)]
            for bi in range(k):
                for bj in range(bi + 1):
                    for r in range(offs[bi], offs[bi + 1]):
                        for c in range(offs[bj], offs[bj + 1]):
                            rows[r][c] = rng.randint(-9, 9)
            m = reduce_matrix(IntMatrix.from_rows(rows), p, 16)
            assert streaming_block_eliminate(m, sizes) == padic_valuations(m)

    def test_saturation_passes_through(self):
        m = reduce_matrix(IntMatrix.from_rows([[2, 0], [0, 8]]), 2, 2)
        got = streaming_block_eliminate(m, [1, 1])
        assert got == DivisorValuations((1,), 1)

    def test_structural_error_above_diagonal(self):
        m = reduce_matrix(IntMatrix.from_rows([[2, 1], [1, 3]]), 2, 16)
        with pytest.raises(BlockStructureError):
            streaming_block_eliminate(m, [1, 1])

    def test_block_sizes_must_tile(self):
        m = reduce_matrix(IntMatrix.from_rows([[2, 0], [1, 3]]), 2, 16)
        with pytest.raises(ValueError):
            streaming_block_eliminate(m, [1, 1, 1])
