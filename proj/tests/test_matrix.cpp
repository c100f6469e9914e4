#include <cmath>
#include <limits>

#include "doctest.h"
#include "weakshot/errors.hpp"
#include "weakshot/matrix.hpp"

using namespace weakshot;

TEST_CASE("construction and element access") {
  Matrix a(2, 3, 1.5);
  CHECK(a.rows == 2);
  CHECK(a.cols == 3);
  CHECK(a.size() == 6);
  CHECK(a(1, 2) == 1.5);
  a(0, 1) = -4.0;
  CHECK(a.data[1] == -4.0);
  CHECK(a.row(1)[0] == 1.5);

  Matrix b{{1.0, 2.0}, {3.0, 4.0}};
  CHECK(b(0, 1) == 2.0);
  CHECK(b(1, 0) == 3.0);
}

TEST_CASE("identity") {
  const Matrix i = Matrix::identity(3);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(i(r, c) == (r == c ? 1.0 : 0.0));
}

TEST_CASE("matmul against a hand-computed product") {
  const Matrix a{{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}};
  const Matrix b{{7.0, 8.0}, {9.0, 10.0}, {11.0, 12.0}};
  const Matrix c = matmul(a, b);
  CHECK(c.rows == 2);
  CHECK(c.cols == 2);
  CHECK(c(0, 0) == 58.0);
  CHECK(c(0, 1) == 64.0);
  CHECK(c(1, 0) == 139.0);
  CHECK(c(1, 1) == 154.0);
}

TEST_CASE("identity is neutral for matmul") {
  const Matrix a{{1.0, -2.0}, {0.5, 3.0}, {2.0, 2.0}};
  CHECK(matmul(a, Matrix::identity(2)) == a);
  CHECK(matmul(Matrix::identity(3), a) == a);
}

TEST_CASE("matmul_tn equals transpose then multiply") {
  const Matrix a{{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
  const Matrix b{{1.0, 0.0, 2.0}, {0.0, 1.0, 1.0}, {3.0, 1.0, 0.0}};
  CHECK(matmul_tn(a, b) == matmul(transpose(a), b));
}

TEST_CASE("transpose twice is the original") {
  const Matrix a{{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}};
  const Matrix t = transpose(a);
  CHECK(t.rows == 3);
  CHECK(t.cols == 2);
  CHECK(t(2, 0) == 3.0);
  CHECK(transpose(t) == a);
}

TEST_CASE("shape mismatches throw") {
  const Matrix a(2, 3);
  const Matrix b(2, 3);
  CHECK_THROWS_AS(matmul(a, b), shape_error);
  CHECK_THROWS_AS(matmul_tn(a, Matrix(3, 2)), shape_error);
}

TEST_CASE("all_finite") {
  Matrix a(2, 2, 1.0);
  CHECK(a.all_finite());
  a(0, 1) = std::nan("");
  CHECK_FALSE(a.all_finite());
  a(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_FALSE(a.all_finite());
}
