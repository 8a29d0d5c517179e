// Hand-built 8x8 two-process instance shared by the runtime tests. The
// operands are arranged so that with boundaries [0,4,8] and K=2:
//   - process 0's B slice hits rows {0,2,3,5}, so it needs only global
//     column 5 from process 1, yet block fetching pulls the block {4,5};
//   - process 1 needs columns {1,2} from process 0 and both of process 0's
//     groups get selected (they coalesce into one interval covering 0..3).

#ifndef SPGEMM1D_TESTS_FIXTURES_HPP
#define SPGEMM1D_TESTS_FIXTURES_HPP

#include "spgemm1d/sparse.hpp"

namespace fixtures {

using spgemm1d::Index;
using spgemm1d::SparseMatrix;
using spgemm1d::Storage;
using spgemm1d::Triplet;

inline SparseMatrix<double> two_proc_a(Storage mode = Storage::DCSC) {
    std::vector<Triplet<double>> ts = {
        {0, 0, 1}, {1, 1, 2}, {2, 2, 3}, {3, 3, 4}, {4, 4, 5}, {5, 5, 6}, {6, 6, 7},
        {7, 7, 8}, {0, 5, 2}, {2, 3, 3}, {6, 1, 4}, {1, 4, 5}, {5, 2, 6}, {3, 6, 7},
    };
    return spgemm1d::from_triplets<double>(8, 8, std::move(ts), mode);
}

inline SparseMatrix<double> two_proc_b(Storage mode = Storage::DCSC) {
    std::vector<Triplet<double>> ts = {
        {0, 0, 1}, {2, 0, 2}, {3, 1, 3}, {5, 2, 4},  {0, 3, 5},  {3, 3, 6},
        {1, 4, 7}, {2, 5, 8}, {6, 5, 9}, {6, 6, 10}, {1, 7, 11},
    };
    return spgemm1d::from_triplets<double>(8, 8, std::move(ts), mode);
}

}  // namespace fixtures

#endif
