#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "lrlab/analysis.hpp"
#include "lrlab/errors.hpp"
#include "support.hpp"

using namespace lrlab;
using lrlab::test::random_matrix;

namespace {

const Dims kDims{20, 10, 20, 200, 20, 20};

PatternSet patterns20() {
    DataConfig dc;
    dc.seed = 4;
    return gen_patterns(dc);
}

Matrix outer_of(std::span<const double> u, std::span<const double> v, double s = 1.0) {
    return Matrix::outer(u, v) * s;
}

TrainTrajectory synthetic(const Params& init, const Params& last, std::size_t iters) {
    TrainTrajectory t{init, {{0, init}, {iters, last}}, {}, iters};
    return t;
}

Params base_params(std::uint64_t seed) {
    ModelConfig mc;
    mc.seed = seed;
    mc.tied_a = true;
    return init_params(mc, kDims);
}

// Cyclic Jacobi eigenvalues of a symmetric matrix, sorted descending.
Vector symmetric_eigenvalues(Matrix a) {
    const std::size_t n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                off += a(p, q) * a(p, q);
            }
        }
        if (off < 1e-30) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    Vector ev(n);
    for (std::size_t i = 0; i < n; ++i) {
        ev[i] = a(i, i);
    }
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

}  // namespace

TEST(Delta, ZeroAtStartAndInjectedUpdate) {
    const Params init = base_params(1);
    Params last = init;
    const Matrix e = random_matrix(20, 20, 9, 0.3);
    last.w_k += e;
    const TrainTrajectory traj = synthetic(init, last, 5);
    const DeltaWeights d0 = delta(traj, 0);
    EXPECT_EQ(d0.d_q.frobenius() + d0.d_k.frobenius() + d0.d_v.frobenius() + d0.d_o.frobenius(), 0.0);
    EXPECT_LE(max_abs_diff(delta(traj, 5).d_k, e), 1e-15);
    try {
        delta(traj, 3);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::not_found);
    }
}

TEST(Spectrum, ZeroAndTwoPatternProjector) {
    for (double s : spectrum(Matrix(5, 5))) {
        EXPECT_EQ(s, 0.0);
    }
    const PatternSet ps = patterns20();
    const Vector s = spectrum(outer_of(ps[0], ps[0]) + outer_of(ps[1], ps[1]));
    EXPECT_NEAR(s[0], 1.0, 1e-12);
    EXPECT_NEAR(s[1], 1.0, 1e-12);
    for (std::size_t i = 2; i < s.size(); ++i) {
        EXPECT_NEAR(s[i], 0.0, 1e-12);
    }
}

TEST(Spectrum, MatchesEigenvaluesOfGram) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const std::size_t r = 3 + seed % 4, c = 2 + seed % 5;
        const Matrix a = random_matrix(r, c, seed);
        const Vector s = spectrum(a);
        const Vector ev = symmetric_eigenvalues(matmul_tn(a, a));
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double want = std::sqrt(std::max(ev[i], 0.0));
            EXPECT_NEAR(s[i], want, 1e-8 * std::max(1.0, want)) << seed << " " << i;
        }
    }
}

TEST(ProjectionTable, Fixtures) {
    const PatternSet ps = patterns20();
    const Matrix p1 = projection_table(outer_of(ps[0], ps[0]), ps).p;
    const Matrix p0 = projection_table(Matrix(20, 20), ps).p;
    const Matrix p25 = projection_table(outer_of(ps[1], ps[4], 3.0), ps).p;
    for (std::size_t i = 0; i < 20; ++i) {
        for (std::size_t j = 0; j < 20; ++j) {
            EXPECT_NEAR(p1(i, j), (i == 0 && j == 0) ? 1.0 : 0.0, 1e-12);
            EXPECT_EQ(p0(i, j), 0.0);
            EXPECT_NEAR(p25(i, j), (i == 1 && j == 4) ? 3.0 : 0.0, 1e-12);
        }
    }
    EXPECT_THROW(projection_table(Matrix(20, 19), ps), Error);
}

TEST(ProjectionTable, Linear) {
    const PatternSet ps = patterns20();
    const Matrix a = random_matrix(20, 20, 1);
    const Matrix b = random_matrix(20, 20, 2);
    const Matrix lhs = projection_table(a + b, ps).p;
    const Matrix rhs = projection_table(a, ps).p + projection_table(b, ps).p;
    EXPECT_LE(max_abs_diff(lhs, rhs), 1e-12);
}

TEST(EnergyRatio, OneInsideDiscriminativeSpanAndInvariant) {
    const PatternSet ps = patterns20();
    // rows 1 and 2 of the table carry everything when dw maps into span{mu_1, mu_2}
    Matrix dw = outer_of(ps[0], ps[3], 2.0) + outer_of(ps[1], ps[7], -1.0) + outer_of(ps[0], ps[1], 0.5);
    EXPECT_NEAR(discriminative_energy_ratio(projection_table(dw, ps)), 1.0, 1e-12);
    EXPECT_EQ(discriminative_energy_ratio(projection_table(Matrix(20, 20), ps)), 0.0);

    // orthogonal map permuting mu_3..mu_20 leaves the ratio unchanged
    const Matrix generic = random_matrix(20, 20, 3);
    Matrix perm(20, 20);
    for (std::size_t j = 0; j < 20; ++j) {
        const std::size_t to = j < 2 ? j : 2 + (j - 2 + 5) % 18;
        perm += Matrix::outer(ps[to], ps[j]);
    }
    const double before = discriminative_energy_ratio(projection_table(generic, ps));
    const double after = discriminative_energy_ratio(projection_table(matmul(generic, perm), ps));
    EXPECT_NEAR(before, after, 1e-12);
}

TEST(RankSweep, FullRankReproducesTrainedModel) {
    DataConfig dc;
    ModelConfig mc;
    mc.m = 30;
    const PatternSet ps = gen_patterns(dc);
    const Dataset tr = gen_dataset(100, ps, dc, 1);
    const Dataset te = gen_dataset(60, ps, dc, 2);
    TrainConfig tc;
    tc.eta = 1.0;
    tc.batch_size = 25;
    tc.iters = 8;
    tc.snapshot_at = {0, 8};
    const TrainTrajectory traj = train(tc, tr, te, mc);
    const std::vector<std::size_t> ranks = {1, 2, 20};
    const auto sweep = rank_sweep(traj, ranks, te);
    const Metrics full = evaluate(*traj.snapshot(8), te);
    ASSERT_EQ(sweep.size(), 3u);
    EXPECT_EQ(sweep[2].rank, 20u);
    EXPECT_NEAR(sweep[2].metrics.hinge, full.hinge, 1e-8);
    EXPECT_NEAR(sweep[2].metrics.attn_on_relevant, full.attn_on_relevant, 1e-8);
    const std::vector<std::size_t> bad = {0};
    EXPECT_THROW(rank_sweep(traj, bad, te), Error);
}

TEST(OtsuSplit, SeparatesTwoClusters) {
    const Vector v = {0.1, 0.12, 0.11, 5.0, 5.2, 4.9, 5.1};
    const TwoClassSplit s = otsu_split(v);
    EXPECT_EQ(s.low_count, 3u);
    EXPECT_GT(s.threshold, 0.12);
    EXPECT_LT(s.threshold, 4.9);
    EXPECT_EQ(otsu_split(Vector{2.0, 2.0, 2.0}).low_count, 3u);
}

TEST(NeuronStats, AllZeroRows) {
    const PatternSet ps = patterns20();
    const Params p = base_params(2);
    const NeuronStats st = neuron_stats(Matrix(200, 20), p.a, ps);
    EXPECT_EQ(st.small_fraction, 1.0);
    for (double a : st.alignment) {
        EXPECT_EQ(a, 0.0);
    }
}

TEST(NeuronStats, HalfLargeAlignedHalfTiny) {
    const PatternSet ps = patterns20();
    const Params p = base_params(3);
    Matrix w = random_matrix(200, 20, 4, 0.01 / std::sqrt(20.0));
    for (std::size_t i = 0; i < 100; ++i) {
        const auto target = p.a(i, 0) > 0 ? ps[0] : ps[1];
        for (std::size_t c = 0; c < 20; ++c) {
            w(i, c) = 10.0 * target[c];
        }
    }
    const NeuronStats st = neuron_stats(w, p.a, ps);
    EXPECT_NEAR(st.small_fraction, 0.5, 1e-12);
    for (std::size_t i = 0; i < 100; ++i) {
        EXPECT_TRUE(st.large[i]);
        EXPECT_NEAR(st.alignment[i], 1.0, 1e-12);
    }
    EXPECT_TRUE(std::is_sorted(st.sorted_norms.begin(), st.sorted_norms.end()));
}

TEST(TheoremCheck, IdealTrajectoryPasses) {
    const PatternSet ps = patterns20();
    Params init = base_params(5);
    init.w_o = Matrix(200, 20);
    Params last = init;
    const Matrix ideal = outer_of(ps[0], ps[0]) + outer_of(ps[1], ps[1]);
    last.w_q += ideal;
    last.w_k += ideal;
    last.w_v += ideal;
    // 80 tiny neurons, 120 aligned with their target pattern
    last.w_o = random_matrix(200, 20, 6, 1e-4);
    for (std::size_t i = 80; i < 200; ++i) {
        const auto target = last.a(i, 0) > 0 ? ps[0] : ps[1];
        for (std::size_t c = 0; c < 20; ++c) {
            last.w_o(i, c) = target[c];
        }
    }
    const TheoremReport rep = theorem_check(synthetic(init, last, 10), ps, TheoremThresholds{});
    for (const MatrixReport& m : rep.matrices) {
        EXPECT_TRUE(m.pass()) << m.name;
        EXPECT_NEAR(m.energy_ratio, 1.0, 1e-12);
    }
    EXPECT_NEAR(rep.neurons.small_fraction, 0.4, 1e-12);
    EXPECT_TRUE(rep.neurons.pass());
    EXPECT_TRUE(rep.pass());
    EXPECT_EQ(rep.at_iter, 10u);
}

TEST(TheoremCheck, IdentityUpdateFailsDominance) {
    const PatternSet ps = patterns20();
    const Params init = base_params(7);
    Params last = init;
    last.w_q += Matrix::identity(20);
    last.w_k += Matrix::identity(20);
    last.w_v += Matrix::identity(20);
    const TheoremReport rep = theorem_check(synthetic(init, last, 4), ps, TheoremThresholds{});
    for (const MatrixReport& m : rep.matrices) {
        EXPECT_FALSE(m.dominance_pass) << m.name;
    }
    EXPECT_FALSE(rep.pass());
}

TEST(TheoremCheck, RequiresSquareConfiguration) {
    ModelConfig mc;
    mc.m_a = 10;
    const Params p = init_params(mc, Dims{20, 10, 20, 200, 10, 20});
    try {
        theorem_check(synthetic(p, p, 1), patterns20(), TheoremThresholds{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::shape);
    }
}
