#ifndef SPGEMM1D_SEMIRING_HPP
#define SPGEMM1D_SEMIRING_HPP

#include <cstdint>

namespace spgemm1d {

// A semiring supplies the scalar type and the (add, multiply) pair the
// multiplication kernels fold over. add must be associative and commutative
// with identity zero(); multiply must distribute over add.

template <class T>
struct PlusTimes {
    using value_type = T;
    static constexpr T zero() { return T{}; }
    static constexpr T one() { return T{1}; }
    static constexpr T add(T a, T b) { return a + b; }
    static constexpr T mul(T a, T b) { return a * b; }
};

using RealPlusTimes = PlusTimes<double>;
using IntPlusTimes = PlusTimes<std::int64_t>;

// Boolean or-and. The scalar is uint8_t (0/1) so matrices hold ordinary
// byte vectors.
struct BoolOrAnd {
    using value_type = std::uint8_t;
    static constexpr std::uint8_t zero() { return 0; }
    static constexpr std::uint8_t one() { return 1; }
    static constexpr std::uint8_t add(std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>(a | b);
    }
    static constexpr std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>(a & b);
    }
};

enum class SemiringId { RealPlusTimes, IntPlusTimes, BoolOrAnd };

}  // namespace spgemm1d

#endif
