#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "spgemm1d/matrix_market.hpp"
#include "spgemm1d/sparse.hpp"

using namespace spgemm1d;

namespace {

void check_column_invariants(const SparseMatrix<double>& a) {
    Index total = 0;
    for (Index s = 0; s < a.stored_column_count(); ++s) {
        auto rows = a.stored_column_rows(s);
        for (std::size_t p = 1; p < rows.size(); ++p) CHECK(rows[p - 1] < rows[p]);
        total += static_cast<Index>(rows.size());
        if (a.mode() == Storage::DCSC) CHECK(!rows.empty());
    }
    CHECK(total == a.nnz());
}

std::string temp_file(const char* stem) {
    return std::string("tmp_sparse_core_") + stem + ".mtx";
}

}  // namespace

TEST_CASE("from_triplets sums duplicates") {
    auto a = from_triplets<double>(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}, Storage::DCSC);
    CHECK(a.nnz() == 1);
    auto ts = a.triplets();
    CHECK(ts[0].row == 0);
    CHECK(ts[0].col == 0);
    CHECK(ts[0].val == 3.0);
}

TEST_CASE("from_triplets rejects out-of-bounds entries") {
    CHECK_THROWS_AS(from_triplets<double>(2, 2, {{2, 0, 1.0}}, Storage::DCSC), IndexError);
    CHECK_THROWS_AS(from_triplets<double>(2, 2, {{0, -1, 1.0}}, Storage::DCSC), IndexError);
}

TEST_CASE("empty matrix") {
    auto a = from_triplets<double>(3, 3, {}, Storage::DCSC);
    CHECK(a.nnz() == 0);
    CHECK(a.nzc() == 0);
    CHECK(a.triplets().empty());
}

TEST_CASE("hypersparse storage keeps only non-empty columns") {
    auto a = fixtures::two_proc_a();
    CHECK(a.mode() == Storage::DCSC);
    CHECK(a.nzc() == 8);  // every column of the fixture holds an entry
    auto sparse = from_triplets<double>(100, 100, {{5, 7, 1.0}, {10, 90, 2.0}}, Storage::DCSC);
    CHECK(sparse.nzc() == 2);
    CHECK(sparse.nonzero_column_ids() == std::vector<Index>{7, 90});
    CHECK(sparse.nnz() >= sparse.nzc());
}

TEST_CASE("CSC and DCSC enumerate the same triplets and round-trip") {
    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 20; ++iter) {
        auto a = oracles::random_sparse(30, 40, 0.05, rng);
        auto csc = a.with_storage(Storage::CSC);
        check_column_invariants(a);
        check_column_invariants(csc);
        CHECK(csc == a);
        auto back = csc.with_storage(Storage::DCSC);
        CHECK(back.mode() == Storage::DCSC);
        CHECK(back == a);
        CHECK(back.nonzero_column_ids() == a.nonzero_column_ids());
        CHECK(csc.nzc() == a.nzc());
    }
}

TEST_CASE("explicit zeros from duplicate summation are kept until pruned") {
    auto a = from_triplets<double>(2, 2, {{0, 0, 1.0}, {0, 0, -1.0}, {1, 1, 2.0}}, Storage::DCSC);
    CHECK(a.nnz() == 2);
    auto pruned = prune_zeros(a);
    CHECK(pruned.nnz() == 1);
    CHECK(pruned.triplets()[0].val == 2.0);
}

TEST_CASE("transpose") {
    auto empty = from_triplets<double>(3, 2, {}, Storage::DCSC);
    CHECK(transpose(empty).nrows() == 2);
    CHECK(transpose(empty).nnz() == 0);

    auto a = from_triplets<double>(2, 2, {{0, 1, 1.0}, {1, 0, 2.0}}, Storage::DCSC);
    auto at = transpose(a);
    CHECK(oracles::to_dense(at).at(0, 1) == 2.0);
    CHECK(oracles::to_dense(at).at(1, 0) == 1.0);

    std::mt19937_64 rng(5);
    auto r = oracles::random_sparse(50, 30, 0.04, rng);
    auto rt = transpose(r);
    CHECK(oracles::max_abs_diff(oracles::to_dense(rt), oracles::dense_transpose(oracles::to_dense(r))) == 0.0);
    CHECK(transpose(rt) == r);
}

TEST_CASE("symmetric permutation") {
    auto a = from_triplets<double>(2, 2, {{0, 1, 5.0}}, Storage::DCSC);
    SUBCASE("identity") {
        CHECK(permute_symmetric(a, Permutation::identity(2)) == a);
    }
    SUBCASE("swap") {
        auto r = permute_symmetric(a, Permutation({1, 0}));
        auto d = oracles::to_dense(r);
        CHECK(d.at(1, 0) == 5.0);
        CHECK(d.at(0, 1) == 0.0);
    }
    SUBCASE("non-square rejected") {
        auto rect = from_triplets<double>(2, 3, {}, Storage::DCSC);
        CHECK_THROWS_AS(permute_symmetric(rect, Permutation::identity(3)), ShapeError);
    }
}

TEST_CASE("random symmetric permutation preserves structure invariants") {
    std::mt19937_64 rng(99);
    auto a = oracles::random_sparse(64, 64, 0.03, rng);
    std::vector<Index> fwd(64);
    for (Index i = 0; i < 64; ++i) fwd[i] = i;
    for (Index i = 63; i > 0; --i) std::swap(fwd[i], fwd[rng() % (i + 1)]);
    Permutation perm(fwd);

    auto p = permute_symmetric(a, perm);
    CHECK(p.nnz() == a.nnz());

    auto da = oracles::to_dense(a);
    auto dp = oracles::to_dense(p);
    for (Index i = 0; i < 64; ++i)
        for (Index j = 0; j < 64; ++j) CHECK(dp.at(perm(i), perm(j)) == da.at(i, j));

    // row-sum multiset and trace(A^T A) are relabeling invariants
    std::vector<double> rs_a, rs_p;
    double tr_a = 0.0, tr_p = 0.0;
    for (Index i = 0; i < 64; ++i) {
        double sa = 0.0, sp = 0.0;
        for (Index j = 0; j < 64; ++j) {
            sa += da.at(i, j);
            sp += dp.at(i, j);
            tr_a += da.at(i, j) * da.at(i, j);
            tr_p += dp.at(i, j) * dp.at(i, j);
        }
        rs_a.push_back(sa);
        rs_p.push_back(sp);
    }
    std::sort(rs_a.begin(), rs_a.end());
    std::sort(rs_p.begin(), rs_p.end());
    for (Index i = 0; i < 64; ++i) CHECK(rs_a[i] == doctest::Approx(rs_p[i]).epsilon(1e-12));
    CHECK(tr_a == doctest::Approx(tr_p).epsilon(1e-12));

    CHECK(permute_symmetric(p, perm.inverse()) == a);
}

TEST_CASE("permutation validation") {
    CHECK_THROWS_AS(Permutation({0, 0}), ConfigError);
    CHECK_THROWS_AS(Permutation({0, 2}), ConfigError);
}

TEST_CASE("matrix market: single real entry") {
    const auto path = temp_file("single");
    {
        std::ofstream out(path);
        out << "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 3.5\n";
    }
    auto a = read_matrix_market(path);
    CHECK(a.nrows() == 1);
    CHECK(a.ncols() == 1);
    CHECK(a.triplets()[0].val == 3.5);
    std::remove(path.c_str());
}

TEST_CASE("matrix market: symmetric expansion") {
    const auto path = temp_file("symmetric");
    {
        std::ofstream out(path);
        out << "%%MatrixMarket matrix coordinate real symmetric\n% comment line\n2 2 1\n2 1 4.25\n";
    }
    auto a = read_matrix_market(path);
    CHECK(a.nnz() == 2);
    auto d = oracles::to_dense(a);
    CHECK(d.at(1, 0) == 4.25);
    CHECK(d.at(0, 1) == 4.25);
    std::remove(path.c_str());
}

TEST_CASE("matrix market: pattern entries default to one") {
    const auto path = temp_file("pattern");
    {
        std::ofstream out(path);
        out << "%%MatrixMarket matrix coordinate pattern general\n4 4 3\n1 2\n3 3\n4 1\n";
    }
    auto a = read_matrix_market(path);
    CHECK(a.nnz() == 3);
    auto d = oracles::to_dense(a);
    CHECK(d.at(0, 1) == 1.0);
    CHECK(d.at(2, 2) == 1.0);
    CHECK(d.at(3, 0) == 1.0);
    std::remove(path.c_str());
}

TEST_CASE("matrix market: parse errors carry the line number") {
    const auto path = temp_file("bad");
    {
        std::ofstream out(path);
        out << "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\nnonsense\n";
    }
    try {
        read_matrix_market(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
    }
    std::remove(path.c_str());

    {
        std::ofstream out(path);
        out << "%%MatrixMarket matrix coordinate real general\n2 2 1\n5 1 1.0\n";
    }
    CHECK_THROWS_AS(read_matrix_market(path), ParseError);
    std::remove(path.c_str());

    {
        std::ofstream out(path);
        out << "%%MatrixMarket matrix array real general\n2 2\n";
    }
    CHECK_THROWS_AS(read_matrix_market(path), ParseError);
    std::remove(path.c_str());

    CHECK_THROWS_AS(read_matrix_market("no_such_file_here.mtx"), IoError);
}

TEST_CASE("matrix market round trip") {
    std::mt19937_64 rng(3);
    auto a = oracles::random_sparse(20, 17, 0.08, rng);
    const auto path = temp_file("roundtrip");
    write_matrix_market(a, path);
    auto b = read_matrix_market(path);
    CHECK(b == a);
    std::remove(path.c_str());
}

TEST_CASE("integer and pattern writers") {
    auto ai = from_triplets<std::int64_t>(3, 3, {{0, 1, 7}, {2, 2, -4}}, Storage::DCSC);
    const auto pi = temp_file("int");
    write_matrix_market(ai, pi);
    auto back = read_matrix_market(pi);
    CHECK(back.nnz() == 2);
    CHECK(oracles::to_dense(back).at(2, 2) == -4.0);
    std::remove(pi.c_str());

    auto ab = from_triplets<std::uint8_t>(2, 2, {{0, 0, 1}, {1, 0, 1}}, Storage::DCSC);
    const auto pb = temp_file("bool");
    write_matrix_market(ab, pb);
    auto backb = read_matrix_market(pb);
    CHECK(backb.nnz() == 2);
    CHECK(oracles::to_dense(backb).at(1, 0) == 1.0);
    std::remove(pb.c_str());
}

TEST_CASE("pattern symmetry detection") {
    auto sym = from_triplets<double>(3, 3, {{0, 1, 1.0}, {1, 0, 9.0}, {2, 2, 1.0}}, Storage::DCSC);
    CHECK(pattern_symmetric(sym));
    auto asym = from_triplets<double>(3, 3, {{0, 1, 1.0}}, Storage::DCSC);
    CHECK(!pattern_symmetric(asym));
}
