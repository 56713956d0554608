#pragma once

#include <memory>
#include <vector>

#include "crq/error.hpp"

namespace crq::qcore {

struct Entry {
    Index index = 0;
    Complex amp;
};

/// Product of the dimensions, throwing InvalidArgument on overflow or a zero factor.
Index checked_product(const Dims& dims);

/// Digits of a flat row-major index (first factor most significant).
std::vector<Index> unravel(Index index, const Dims& dims);
Index ravel(const std::vector<Index>& digits, const Dims& dims);

/// Normalized pure state on a tensor product of factors.
///
/// Amplitudes are stored sparsely. A state may be held as a product of
/// independent blocks over consecutive factor ranges; tensor() concatenates
/// blocks without expanding them, so huge product states stay cheap.
class State {
public:
    struct Block {
        Dims dims;
        Index dim = 1;
        std::vector<Entry> entries;  // sorted by index
    };
    using BlockPtr = std::shared_ptr<const Block>;

    State() = default;
    State(Dims dims, std::vector<Entry> entries);

    static State from_dense(Dims dims, const std::vector<Complex>& amps);
    static State basis(Dims dims, Index index);
    /// Unnormalized input is scaled to unit norm; a zero vector is rejected.
    static State normalized(Dims dims, std::vector<Entry> entries);

    const Dims& dims() const { return dims_; }
    Index dimension() const { return dimension_; }
    std::size_t factor_count() const { return dims_.size(); }

    const std::vector<BlockPtr>& blocks() const { return blocks_; }
    std::vector<std::size_t> block_offsets() const;

    std::uint64_t nonzeros() const;
    std::uint64_t stored_nonzeros() const;

    /// Sorted nonzero entries; expands a lazy product.
    std::vector<Entry> entries() const;
    State flattened() const;
    /// Same amplitudes viewed on another factorization of the same total dimension.
    State reshaped(Dims dims) const;

    Complex amplitude(Index index) const;
    std::vector<Complex> to_dense() const;
    double norm() const;

    State tensor(const State& other) const;
    /// Factor p of the result is factor order[p] of this state.
    State permute_factors(const std::vector<std::size_t>& order) const;

    bool empty() const { return blocks_.empty(); }

    struct Unchecked {};
    State(Unchecked, Dims dims, std::vector<BlockPtr> blocks);

private:
    Dims dims_;
    Index dimension_ = 0;
    std::vector<BlockPtr> blocks_;
};

/// Expand a block list into one sorted entry list over the concatenated dims.
std::vector<Entry> expand_blocks(const std::vector<State::BlockPtr>& blocks);

/// Reorder the digits of every entry of a single block.
State::Block permute_block(const State::Block& block, const std::vector<std::size_t>& order);

/// <a|b>
Complex inner(const State& a, const State& b);
/// 1 - |<a|b>|
double overlap_epsilon(const State& a, const State& b);

State tensor(const std::vector<State>& parts);

}  // namespace crq::qcore
