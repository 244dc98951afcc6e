#include <doctest.h>

#include "oracles.hpp"
#include "sx/matcore.hpp"

using namespace sx;

TEST_CASE("matmul identity and hand cases") {
    Matrix b = oracle::random_matrix(3, 4, 7);
    Matrix i3 = Matrix::Identity(3, 3);
    CHECK(frob_norm(matmul(i3, b) - b) == doctest::Approx(0.0));

    Matrix a(2, 2);
    a << 1, 2, 3, 4;
    Matrix v(2, 1);
    v << 0, 1;
    Matrix r = matmul(a, v);
    CHECK(r(0, 0) == 2);
    CHECK(r(1, 0) == 4);
}

TEST_CASE("matmul matches triple-loop oracle") {
    Matrix a = oracle::random_matrix(5, 3, 11);
    Matrix b = oracle::random_matrix(3, 4, 13);
    Matrix got = matmul(a, b);
    oracle::Mat want = oracle::matmul(oracle::from_eigen(a), oracle::from_eigen(b));
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 4; ++j) CHECK(got(i, j) == doctest::Approx(want.at(i, j)).epsilon(1e-12));
}

TEST_CASE("matmul shape error") {
    Matrix a(2, 3), b(2, 3);
    a.setZero();
    b.setZero();
    CHECK_THROWS_AS(matmul(a, b), shape_error);
}

TEST_CASE("matmul associativity on random triples") {
    for (int t = 0; t < 20; ++t) {
        Matrix a = oracle::random_matrix(4, 3, 100 + t);
        Matrix b = oracle::random_matrix(3, 5, 200 + t);
        Matrix c = oracle::random_matrix(5, 2, 300 + t);
        Matrix lhs = matmul(matmul(a, b), c);
        Matrix rhs = matmul(a, matmul(b, c));
        CHECK(frob_norm(lhs - rhs) <= 1e-10 * std::max(1.0, frob_norm(lhs)));
    }
}

TEST_CASE("frob_norm basics") {
    Matrix z = Matrix::Zero(4, 5);
    CHECK(frob_norm(z) == 0.0);
    Matrix p(1, 2);
    p << 3, 4;
    CHECK(frob_norm(p) == doctest::Approx(5.0));
    CHECK(frob_norm(p - p) == 0.0);

    Matrix r = oracle::random_matrix(6, 7, 17);
    double s = 0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 7; ++j) s += r(i, j) * r(i, j);
    CHECK(frob_norm(r) == doctest::Approx(std::sqrt(s)).epsilon(1e-12));
}

TEST_CASE("solve_lsq identity system returns y") {
    Matrix y = oracle::random_matrix(3, 2, 23);
    Matrix x = solve_lsq(Matrix::Identity(3, 3), y);
    CHECK(frob_norm(x - y) <= 1e-9 * frob_norm(y));
}

TEST_CASE("solve_lsq column means case") {
    Matrix a(2, 1);
    a << 1, 1;
    Matrix y(2, 2);
    y << 1, 2, 3, 4;
    Matrix x = solve_lsq(a, y);
    CHECK(x(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(x(0, 1) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("solve_lsq matches elimination oracle on random systems") {
    for (int t = 0; t < 10; ++t) {
        Matrix a = oracle::random_matrix(20, 3, 400 + t);
        Matrix y = oracle::random_matrix(20, 2, 500 + t);
        Matrix got = solve_lsq(a, y);
        oracle::Mat want = oracle::solve_lsq(oracle::from_eigen(a), oracle::from_eigen(y));
        const double res_got = frob_norm(matmul(a, got) - y);
        const double res_want = oracle::frob(
            [&] {
                oracle::Mat d = oracle::matmul(oracle::from_eigen(a), want);
                for (std::size_t i = 0; i < d.a.size(); ++i) d.a[i] -= y.data()[i];
                return d;
            }());
        CHECK(res_got == doctest::Approx(res_want).epsilon(1e-9));
        CHECK(frob_norm(got - oracle::to_eigen(want)) <= 1e-7 * (1 + frob_norm(got)));
    }
}

TEST_CASE("solve_lsq zero matrix returns zero") {
    Matrix a = Matrix::Zero(4, 2);
    Matrix y = oracle::random_matrix(4, 3, 31);
    Matrix x = solve_lsq(a, y);
    CHECK(frob_norm(x) == 0.0);
    CHECK(x.rows() == 2);
    CHECK(x.cols() == 3);
}

TEST_CASE("solve_lsq optimality under random perturbations") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> dist;
    for (int t = 0; t < 100; ++t) {
        Matrix a = oracle::random_matrix(12, 3, 600 + t);
        Matrix y = oracle::random_matrix(12, 2, 700 + t);
        Matrix x = solve_lsq(a, y);
        const double base = frob_norm(matmul(a, x) - y);
        for (double eta : {1e-3, 1e-2}) {
            Matrix g(3, 2);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 2; ++j) g(i, j) = dist(rng);
            const double perturbed = frob_norm(matmul(a, x + eta * g) - y);
            CHECK(base <= perturbed + 1e-12);
        }
    }
}

TEST_CASE("make_matrix rejects non-finite input") {
    double vals[4] = {1, 2, std::nan(""), 4};
    CHECK_THROWS_AS(make_matrix(2, 2, vals), shape_error);
    double ok[4] = {1, 2, 3, 4};
    Matrix m = make_matrix(2, 2, ok);
    CHECK(m(1, 0) == 3);
}
