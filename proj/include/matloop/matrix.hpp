#pragma once

// Dense row-major matrices over a semiring.

#include <cstddef>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include <boost/container/small_vector.hpp>

#include "matloop/error.hpp"
#include "matloop/semiring.hpp"

namespace matloop {

template <class S>
class KMatrix {
public:
    using semiring_type = S;
    using value_type = typename S::value_type;
    using storage_type = boost::container::small_vector<value_type, 4>;

    KMatrix() = default;
    KMatrix(std::size_t rows, std::size_t cols, const value_type& fill)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    KMatrix(std::size_t rows, std::size_t cols, storage_type data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw Error(ErrorKind::ShapeMismatch, "entry count does not match shape");
    }

    static KMatrix zeros(const S& sr, std::size_t rows, std::size_t cols) {
        return KMatrix(rows, cols, sr.zero());
    }
    static KMatrix identity(const S& sr, std::size_t n) {
        KMatrix m = zeros(sr, n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = sr.one();
        return m;
    }
    static KMatrix scalar(const value_type& v) { return KMatrix(1, 1, v); }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    value_type& operator()(std::size_t i, std::size_t j) {
        unit_ = -1;
        return data_[i * cols_ + j];
    }
    const value_type& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    const value_type& at(std::size_t i, std::size_t j) const {
        if (i >= rows_ || j >= cols_) throw Error(ErrorKind::IndexOutOfRange, "matrix index out of range");
        return (*this)(i, j);
    }

    storage_type& data() noexcept {
        unit_ = -1;
        return data_;
    }
    const storage_type& data() const noexcept { return data_; }

    /// When the matrix is known to be a canonical vector (column) or its
    /// transpose (row), the 0-based position of the one entry; otherwise -1.
    long unit_index() const noexcept { return unit_; }
    void mark_unit(long index) noexcept { unit_ = index; }
    void clear_unit() noexcept { unit_ = -1; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    storage_type data_;
    long unit_ = -1;
};

/// b_i^n: 1-based index i, dimension n.
template <class S>
KMatrix<S> canonical_vector(std::size_t i, std::size_t n, const S& sr = S{}) {
    if (i < 1 || i > n)
        throw Error(ErrorKind::IndexOutOfRange,
                    "canonical vector index " + std::to_string(i) + " outside 1.." + std::to_string(n));
    KMatrix<S> v = KMatrix<S>::zeros(sr, n, 1);
    v(i - 1, 0) = sr.one();
    v.mark_unit(static_cast<long>(i - 1));
    return v;
}

template <class S>
bool mat_equal(const KMatrix<S>& a, const KMatrix<S>& b, const S& sr = S{}, double tol = 0) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (!sr.equal(a.data()[k], b.data()[k], tol)) return false;
    return true;
}

namespace ops {

template <class S>
KMatrix<S> transpose(const KMatrix<S>& a) {
    using Storage = typename KMatrix<S>::storage_type;
    Storage out;
    out.reserve(a.size());
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) out.push_back(a(i, j));
    KMatrix<S> t(a.cols(), a.rows(), std::move(out));
    t.mark_unit(a.unit_index());
    return t;
}

inline void require_shape(bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::ShapeMismatch, what);
}

template <class S>
KMatrix<S> matmul(const S& sr, const KMatrix<S>& a, const KMatrix<S>& b) {
    require_shape(a.cols() == b.rows(), "matrix product with incompatible inner dimensions");
    const std::size_t n = a.rows(), m = b.cols(), k = a.cols();
    // Canonical vectors select a column (A * b_j) or a row (b_i^T * A).
    if (b.unit_index() >= 0 && m == 1) {
        const std::size_t j = static_cast<std::size_t>(b.unit_index());
        typename KMatrix<S>::storage_type out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(a(i, j));
        return KMatrix<S>(n, 1, std::move(out));
    }
    if (a.unit_index() >= 0 && n == 1) {
        const std::size_t i = static_cast<std::size_t>(a.unit_index());
        typename KMatrix<S>::storage_type out;
        out.reserve(m);
        for (std::size_t j = 0; j < m; ++j) out.push_back(b(i, j));
        return KMatrix<S>(1, m, std::move(out));
    }
    KMatrix<S> c = KMatrix<S>::zeros(sr, n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            const auto& x = a(i, l);
            if (sr.is_zero(x)) continue;
            for (std::size_t j = 0; j < m; ++j) c(i, j) = sr.plus(c(i, j), sr.times(x, b(l, j)));
        }
    return c;
}

template <class S>
KMatrix<S> add(const S& sr, const KMatrix<S>& a, const KMatrix<S>& b) {
    require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "sum of matrices with different shapes");
    typename KMatrix<S>::storage_type out;
    out.reserve(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out.push_back(sr.plus(a.data()[k], b.data()[k]));
    return KMatrix<S>(a.rows(), a.cols(), std::move(out));
}

/// In-place a := a + b.
template <class S>
void add_into(const S& sr, KMatrix<S>& a, const KMatrix<S>& b) {
    require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "sum of matrices with different shapes");
    for (std::size_t k = 0; k < a.size(); ++k) a.data()[k] = sr.plus(a.data()[k], b.data()[k]);
    a.clear_unit();
}

template <class S>
KMatrix<S> scale(const S& sr, const typename S::value_type& s, const KMatrix<S>& a) {
    typename KMatrix<S>::storage_type out;
    out.reserve(a.size());
    for (const auto& x : a.data()) out.push_back(sr.times(s, x));
    return KMatrix<S>(a.rows(), a.cols(), std::move(out));
}

template <class S>
KMatrix<S> hadamard(const S& sr, const KMatrix<S>& a, const KMatrix<S>& b) {
    require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "pointwise product of matrices with different shapes");
    typename KMatrix<S>::storage_type out;
    out.reserve(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out.push_back(sr.times(a.data()[k], b.data()[k]));
    return KMatrix<S>(a.rows(), a.cols(), std::move(out));
}

}  // namespace ops

/// "ROWS x COLS" header line followed by one line per row.
template <class S>
void print_matrix(std::ostream& os, const KMatrix<S>& m, const S& sr = S{}) {
    os << m.rows() << " x " << m.cols() << "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << ' ';
            os << sr.print(m(i, j));
        }
        os << "\n";
    }
}

template <class S>
std::string to_string(const KMatrix<S>& m, const S& sr = S{}) {
    std::ostringstream os;
    print_matrix(os, m, sr);
    return os.str();
}

}  // namespace matloop
