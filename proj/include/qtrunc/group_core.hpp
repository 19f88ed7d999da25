#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qtrunc {

using Coord = std::int64_t;

/// Canonical normal form of a group element. The meaning of the coordinates
/// depends on the family: residue mod m (Cyclic), integer tuple (FreeAbelian),
/// (a, b, c) (Heisenberg3), (rotation, flip) (Dihedral), table index (FiniteTable).
struct GroupElement
{
    std::vector<Coord> nf;

    GroupElement() = default;
    GroupElement(std::initializer_list<Coord> c) : nf(c) {}
    explicit GroupElement(std::vector<Coord> c) : nf(std::move(c)) {}

    auto operator<=>(const GroupElement&) const = default;
    bool operator==(const GroupElement&) const = default;
};

struct GroupElementHash
{
    std::size_t operator()(const GroupElement& x) const noexcept;
};

enum class Family { Cyclic, FreeAbelian, Heisenberg3, Dihedral, FiniteTable };

/// Identifies a group together with its symmetric generating set.
struct GroupId
{
    Family family = Family::Cyclic;
    int parameter = 1;       // m for Cyclic, d for FreeAbelian, n for Dihedral
    std::string table_name;  // FiniteTable only ("S3", "Q8")
    std::vector<GroupElement> generators;  // closed under inverses, contains identity
    bool default_generators = true;

    /// Catalog string ("Z^2", "Z/6", "H3", "D4", "S3", "Q8"), without generators.
    std::string catalog_name() const;
};

/// Snapshot of a word-metric ball: elements in lexicographic normal-form order,
/// their word lengths, and a reverse index.
struct BallIndex
{
    int radius = 0;
    std::vector<GroupElement> elements;
    std::vector<int> lengths;
    std::unordered_map<GroupElement, std::size_t, GroupElementHash> index;

    std::size_t size() const { return elements.size(); }
    std::optional<std::size_t> find(const GroupElement& x) const;
};

class Group;
using GroupPtr = std::shared_ptr<const Group>;

/**
 * A finitely generated group from the catalog with its word metric.
 *
 * Multiplication and inversion are pure. Word lengths come from closed forms
 * (Cyclic and FreeAbelian with their standard generators) or from a memoized
 * breadth-first search of the Cayley graph. The BFS cache is guarded by a
 * mutex, so a Group may be shared between threads.
 */
class Group
{
public:
    static constexpr std::size_t kDefaultBallBudget = 100000;

    Group(GroupId id, std::size_t ball_budget);

    const GroupId& id() const { return id_; }
    std::string name() const;
    bool is_finite() const;
    std::optional<std::size_t> order() const;
    bool is_abelian() const;
    std::size_t ball_budget() const { return budget_; }

    GroupElement identity() const;
    GroupElement multiply(const GroupElement& x, const GroupElement& y) const;
    GroupElement inverse(const GroupElement& x) const;
    bool is_identity(const GroupElement& x) const { return x == identity(); }

    /// Throws StructuralError when x is not a valid normal form for this family.
    void validate(const GroupElement& x) const;

    int word_length(const GroupElement& x) const;
    /// Word length computed by BFS even where a closed form exists.
    int bfs_word_length(const GroupElement& x) const;
    bool has_closed_form_length() const;

    /// All x with word_length(x) <= n, lexicographically ordered.
    std::vector<GroupElement> enumerate_ball(int n) const;
    std::shared_ptr<const BallIndex> ball_index(int n) const;

    /// Finite groups: every element, lexicographically ordered.
    std::vector<GroupElement> all_elements() const;
    /// Finite groups: the largest word length.
    int diameter() const;

    std::string format(const GroupElement& x) const;
    GroupElement parse(std::string_view text) const;

private:
    std::optional<int> closed_form_length(const GroupElement& x) const;
    void extend_bfs_locked(int radius) const;
    int stabilization_radius_locked() const;

    GroupId id_;
    std::size_t budget_;
    std::vector<std::vector<int>> table_;   // FiniteTable multiplication
    std::vector<int> table_inverse_;
    std::vector<std::string> table_names_;

    mutable std::mutex mutex_;
    mutable std::vector<std::vector<GroupElement>> layers_;
    mutable std::unordered_map<GroupElement, int, GroupElementHash> bfs_lengths_;
    mutable bool exhausted_ = false;  // finite group fully enumerated
    mutable std::map<int, std::shared_ptr<const BallIndex>> ball_cache_;
};

/// Builds a group from a catalog id ("Z", "Z^d", "Z/m", "H3", "Dn", "S3", "Q8").
/// `generators` is an optional ';'-separated list of elements; inverses and the
/// identity are added automatically. Empty means the family's default set.
GroupPtr make_group(std::string_view catalog_id, std::string_view generators = {},
                    std::size_t ball_budget = Group::kDefaultBallBudget);

}  // namespace qtrunc
