#include "crq/qcore/observable.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace crq::qcore {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kMergeGap = 1e-9;

struct Column {
    double value;
    std::size_t block;
    Eigen::Index col;
};

}  // namespace

double max_abs(const Eigen::MatrixXcd& m) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) s = std::max(s, std::abs(m(i, j)));
    return s;
}

Observable::Observable(const Eigen::MatrixXcd& matrix) {
    if (matrix.rows() != matrix.cols() || matrix.rows() == 0)
        throw Error(ErrorKind::DimensionMismatch, "observable matrix must be square and nonempty");
    const Eigen::Index d = matrix.rows();
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            if (!std::isfinite(matrix(i, j).real()) || !std::isfinite(matrix(i, j).imag()))
                throw Error(ErrorKind::InvalidArgument, "non-finite matrix entry");
    double scale = std::max(1.0, max_abs(matrix));
    if (max_abs(matrix - matrix.adjoint()) > kHermitianTol * scale)
        throw Error(ErrorKind::NonHermitian, "matrix differs from its adjoint");
    matrix_ = (matrix + matrix.adjoint()) * 0.5;

    std::vector<Eigen::Index> parent(d);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](Eigen::Index x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            if (matrix_(i, j) != Complex{}) {
                diagonal_ = false;
                parent[find(i)] = find(j);
            }

    std::map<Eigen::Index, std::vector<Index>> groups;
    for (Eigen::Index i = 0; i < d; ++i) groups[find(i)].push_back(static_cast<Index>(i));

    std::vector<Column> columns;
    std::vector<std::vector<double>> block_values;
    for (auto& [root, idx] : groups) {
        Block b;
        b.indices = std::move(idx);
        const auto k = static_cast<Eigen::Index>(b.indices.size());
        std::vector<double> values;
        if (k == 1) {
            b.vectors = Eigen::MatrixXcd::Identity(1, 1);
            values.push_back(matrix_(static_cast<Eigen::Index>(b.indices[0]),
                                     static_cast<Eigen::Index>(b.indices[0])).real());
        } else {
            Eigen::MatrixXcd sub(k, k);
            for (Eigen::Index i = 0; i < k; ++i)
                for (Eigen::Index j = 0; j < k; ++j)
                    sub(i, j) = matrix_(static_cast<Eigen::Index>(b.indices[i]),
                                        static_cast<Eigen::Index>(b.indices[j]));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sub);
            b.vectors = solver.eigenvectors();
            for (Eigen::Index c = 0; c < k; ++c) values.push_back(solver.eigenvalues()(c));
        }
        for (Eigen::Index c = 0; c < k; ++c) columns.push_back({values[c], blocks_.size(), c});
        b.labels.assign(static_cast<std::size_t>(k), 0);
        blocks_.push_back(std::move(b));
    }

    std::sort(columns.begin(), columns.end(),
              [](const Column& a, const Column& b) { return a.value < b.value; });
    std::size_t start = 0;
    while (start < columns.size()) {
        std::size_t end = start + 1;
        while (end < columns.size() && columns[end].value - columns[end - 1].value < kMergeGap) ++end;
        double mean = 0.0;
        for (std::size_t c = start; c < end; ++c) {
            mean += columns[c].value;
            blocks_[columns[c].block].labels[static_cast<std::size_t>(columns[c].col)] = eigenvalues_.size();
        }
        eigenvalues_.push_back(mean / static_cast<double>(end - start));
        start = end;
    }
}

Observable Observable::diagonal(const std::vector<double>& values) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(values.size()),
                                                static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
    return Observable(m);
}

std::optional<std::size_t> Observable::eigen_index(double value) const {
    std::optional<std::size_t> best;
    double gap = kMergeGap;
    for (std::size_t k = 0; k < eigenvalues_.size(); ++k) {
        double g = std::abs(eigenvalues_[k] - value);
        if (g <= gap) {
            gap = g;
            best = k;
        }
    }
    return best;
}

std::size_t Observable::multiplicity(std::size_t k) const {
    std::size_t n = 0;
    for (const auto& b : blocks_) n += static_cast<std::size_t>(std::count(b.labels.begin(), b.labels.end(), k));
    return n;
}

Eigen::MatrixXcd Observable::projector(std::size_t k) const {
    if (k >= eigenvalues_.size()) throw Error(ErrorKind::IndexOutOfRange, "eigenvalue index");
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(matrix_.rows(), matrix_.cols());
    for (const auto& b : blocks_) {
        for (std::size_t c = 0; c < b.labels.size(); ++c) {
            if (b.labels[c] != k) continue;
            auto col = b.vectors.col(static_cast<Eigen::Index>(c));
            for (std::size_t i = 0; i < b.indices.size(); ++i)
                for (std::size_t j = 0; j < b.indices.size(); ++j)
                    p(static_cast<Eigen::Index>(b.indices[i]), static_cast<Eigen::Index>(b.indices[j])) +=
                        col(static_cast<Eigen::Index>(i)) * std::conj(col(static_cast<Eigen::Index>(j)));
        }
    }
    return p;
}

Eigen::MatrixXcd Observable::eigenvectors(std::vector<std::size_t>* labels) const {
    struct Col {
        std::size_t label;
        std::size_t block;
        std::size_t col;
    };
    std::vector<Col> cols;
    for (std::size_t b = 0; b < blocks_.size(); ++b)
        for (std::size_t c = 0; c < blocks_[b].labels.size(); ++c) cols.push_back({blocks_[b].labels[c], b, c});
    std::stable_sort(cols.begin(), cols.end(), [](const Col& a, const Col& b) { return a.label < b.label; });
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(matrix_.rows(), matrix_.cols());
    if (labels) labels->clear();
    for (std::size_t j = 0; j < cols.size(); ++j) {
        const auto& b = blocks_[cols[j].block];
        for (std::size_t i = 0; i < b.indices.size(); ++i)
            v(static_cast<Eigen::Index>(b.indices[i]), static_cast<Eigen::Index>(j)) =
                b.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[j].col));
        if (labels) labels->push_back(cols[j].label);
    }
    return v;
}

bool Observable::same_as(const Observable& other, double tol) const {
    if (dim() != other.dim()) return false;
    return max_abs(matrix_ - other.matrix_) <= tol;
}

Eigen::MatrixXcd embed_operator(const Eigen::MatrixXcd& op, const std::vector<std::size_t>& from,
                                const std::vector<std::size_t>& into, const Dims& dims) {
    Dims into_dims;
    for (std::size_t f : into) into_dims.push_back(dims.at(f));
    Dims from_dims;
    for (std::size_t f : from) from_dims.push_back(dims.at(f));
    Index d_into = 1, d_from = 1;
    for (Index d : into_dims) d_into *= d;
    for (Index d : from_dims) d_from *= d;
    if (static_cast<Index>(op.rows()) != d_from)
        throw Error(ErrorKind::DimensionMismatch, "operator size does not match its factors");
    std::vector<std::size_t> where(from.size());
    for (std::size_t k = 0; k < from.size(); ++k) {
        auto it = std::find(into.begin(), into.end(), from[k]);
        if (it == into.end()) throw Error(ErrorKind::FactorMismatch, "embedding target misses a factor");
        where[k] = static_cast<std::size_t>(it - into.begin());
    }
    std::vector<bool> inside(into.size(), false);
    for (std::size_t w : where) inside[w] = true;

    // split each local index of `into` into (position in `from`, remainder key)
    std::vector<Index> t(d_into), rest(d_into);
    std::vector<Index> digits(into.size());
    for (Index r = 0; r < d_into; ++r) {
        Index x = r;
        for (std::size_t k = into.size(); k-- > 0;) {
            digits[k] = x % into_dims[k];
            x /= into_dims[k];
        }
        Index ti = 0;
        for (std::size_t k = 0; k < from.size(); ++k) ti = ti * from_dims[k] + digits[where[k]];
        Index ri = 0;
        for (std::size_t k = 0; k < into.size(); ++k)
            if (!inside[k]) ri = ri * into_dims[k] + digits[k];
        t[r] = ti;
        rest[r] = ri;
    }
    std::map<Index, std::vector<Index>> by_rest;
    for (Index r = 0; r < d_into; ++r) by_rest[rest[r]].push_back(r);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d_into), static_cast<Eigen::Index>(d_into));
    for (const auto& [key, rs] : by_rest)
        for (Index a : rs)
            for (Index b : rs)
                out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    op(static_cast<Eigen::Index>(t[a]), static_cast<Eigen::Index>(t[b]));
    return out;
}

}  // namespace crq::qcore
