#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sighedge/core/rng.hpp"
#include "sighedge/kernels/kernels.hpp"

using namespace sighedge;

namespace {

template <typename T>
std::vector<T> random_vec(Rng& rng, int n) {
    std::vector<T> v(n);
    for (T& x : v) x = static_cast<T>(rng.gaussian());
    return v;
}

template <typename T>
double max_rel_diff(const std::vector<T>& a, const std::vector<T>& b) {
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double denom = std::max(1.0, std::abs(static_cast<double>(b[i])));
        worst = std::max(worst, std::abs(static_cast<double>(a[i]) - b[i]) / denom);
    }
    return worst;
}

template <typename T>
void check_gemms(double tol) {
    Rng rng(17);
    // odd shapes on purpose: the vector kernels must handle edge tiles
    for (auto [m, k, n] : {std::array<int, 3>{1, 1, 1}, {3, 5, 7}, {4, 16, 16}, {13, 9, 33},
                           {32, 31, 17}, {5, 64, 6}}) {
        std::vector<T> A = random_vec<T>(rng, m * k);
        std::vector<T> B = random_vec<T>(rng, k * n);
        std::vector<T> At = random_vec<T>(rng, k * m);
        std::vector<T> Bt = random_vec<T>(rng, n * k);
        for (bool acc : {false, true}) {
            std::vector<T> C0 = random_vec<T>(rng, m * n), C1 = C0;
            kern::gemm_nn<T>(A.data(), B.data(), C0.data(), m, k, n, acc);
            kern::ref::gemm_nn<T>(A.data(), B.data(), C1.data(), m, k, n, acc);
            CHECK(max_rel_diff(C0, C1) < tol);

            C0 = random_vec<T>(rng, m * n);
            C1 = C0;
            kern::gemm_nt<T>(A.data(), Bt.data(), C0.data(), m, k, n, acc);
            kern::ref::gemm_nt<T>(A.data(), Bt.data(), C1.data(), m, k, n, acc);
            CHECK(max_rel_diff(C0, C1) < tol);

            C0 = random_vec<T>(rng, m * n);
            C1 = C0;
            kern::gemm_tn<T>(At.data(), B.data(), C0.data(), m, k, n, acc);
            kern::ref::gemm_tn<T>(At.data(), B.data(), C1.data(), m, k, n, acc);
            CHECK(max_rel_diff(C0, C1) < tol);
        }
    }
}

}  // namespace

TEST_CASE("active ISA reports a known name") {
    std::string name = kern::isa_name(kern::active_isa());
    CHECK((name == "avx2" || name == "scalar"));
}

TEST_CASE("gemm variants match the scalar reference (float)") { check_gemms<float>(1e-4); }

TEST_CASE("gemm variants match the scalar reference (double)") { check_gemms<double>(1e-12); }

TEST_CASE("axpy and dot match the scalar reference") {
    Rng rng(23);
    for (int n : {1, 3, 8, 17, 64, 1001}) {
        std::vector<float> xf = random_vec<float>(rng, n), yf = random_vec<float>(rng, n);
        std::vector<float> yf2 = yf;
        kern::axpy<float>(0.37f, xf.data(), yf.data(), n);
        kern::ref::axpy<float>(0.37f, xf.data(), yf2.data(), n);
        CHECK(max_rel_diff(yf, yf2) < 1e-5);
        CHECK(kern::dot<float>(xf.data(), yf.data(), n) ==
              doctest::Approx(kern::ref::dot<float>(xf.data(), yf.data(), n)).epsilon(1e-6));

        std::vector<double> xd = random_vec<double>(rng, n), yd = random_vec<double>(rng, n);
        std::vector<double> yd2 = yd;
        kern::axpy<double>(0.37, xd.data(), yd.data(), n);
        kern::ref::axpy<double>(0.37, xd.data(), yd2.data(), n);
        CHECK(max_rel_diff(yd, yd2) < 1e-14);
        CHECK(kern::dot<double>(xd.data(), yd.data(), n) ==
              doctest::Approx(kern::ref::dot<double>(xd.data(), yd.data(), n)).epsilon(1e-13));
    }
}

TEST_CASE("dot accumulates in double precision") {
    // one large and many tiny terms: float accumulation would lose the tail
    int n = 1 << 16;
    std::vector<float> x(n, 1.0f), y(n, 1e-4f);
    x[0] = 1e4f;
    y[0] = 1e4f;
    double expect = 1e8 + (n - 1) * 1e-4;
    CHECK(kern::dot<float>(x.data(), y.data(), n) == doctest::Approx(expect).epsilon(1e-9));
}
