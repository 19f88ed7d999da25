#include "qtrunc/group_core.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "qtrunc/errors.hpp"

namespace qtrunc {

namespace {

Coord mod(Coord a, Coord m)
{
    Coord r = a % m;
    return r < 0 ? r + m : r;
}

std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

// Permutations of {1,2,3} in lexicographic one-line order; composition (pq)(i) = p(q(i)).
struct S3Table
{
    std::vector<std::array<int, 3>> perms;
    std::vector<std::string> names;
};

S3Table make_s3()
{
    S3Table t;
    std::array<int, 3> p{1, 2, 3};
    do {
        t.perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    for (const auto& q : t.perms) {
        std::string name;
        std::array<bool, 3> seen{};
        for (int start = 1; start <= 3; ++start) {
            if (seen[start - 1] || q[start - 1] == start) {
                seen[start - 1] = true;
                continue;
            }
            std::string cyc = "(";
            int i = start;
            while (!seen[i - 1]) {
                seen[i - 1] = true;
                cyc += std::to_string(i);
                i = q[i - 1];
            }
            name += cyc + ")";
        }
        t.names.push_back(name.empty() ? "e" : name);
    }
    return t;
}

// Unit quaternions {±1, ±i, ±j, ±k}; index = 2 * unit + sign.
int quaternion_product(int x, int y)
{
    // unit: 0 = 1, 1 = i, 2 = j, 3 = k
    static constexpr int unit_table[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
    static constexpr int sign_table[4][4] = {{0, 0, 0, 0}, {0, 1, 0, 1}, {0, 1, 1, 0}, {0, 0, 1, 1}};
    int ux = x / 2, sx = x % 2, uy = y / 2, sy = y % 2;
    int u = unit_table[ux][uy];
    int s = (sx + sy + sign_table[ux][uy]) % 2;
    return 2 * u + s;
}

// Integer row reduction: true iff the rows generate Z^d.
bool generates_lattice(std::vector<std::vector<Coord>> rows, int d)
{
    std::size_t pivot_row = 0;
    for (int col = 0; col < d; ++col) {
        while (true) {
            std::size_t best = rows.size();
            for (std::size_t i = pivot_row; i < rows.size(); ++i)
                if (rows[i][col] != 0 &&
                    (best == rows.size() || std::abs(rows[i][col]) < std::abs(rows[best][col])))
                    best = i;
            if (best == rows.size())
                return false;
            std::swap(rows[pivot_row], rows[best]);
            bool reduced = true;
            for (std::size_t i = pivot_row + 1; i < rows.size(); ++i) {
                if (rows[i][col] == 0)
                    continue;
                Coord q = rows[i][col] / rows[pivot_row][col];
                for (int k = 0; k < d; ++k)
                    rows[i][k] -= q * rows[pivot_row][k];
                if (rows[i][col] != 0)
                    reduced = false;
            }
            if (reduced)
                break;
        }
        if (std::abs(rows[pivot_row][col]) != 1)
            return false;
        ++pivot_row;
    }
    return true;
}

}  // namespace

std::size_t GroupElementHash::operator()(const GroupElement& x) const noexcept
{
    std::size_t h = 0xcbf29ce484222325ULL;
    for (Coord c : x.nf) {
        h ^= static_cast<std::size_t>(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

std::optional<std::size_t> BallIndex::find(const GroupElement& x) const
{
    auto it = index.find(x);
    if (it == index.end())
        return std::nullopt;
    return it->second;
}

std::string GroupId::catalog_name() const
{
    switch (family) {
    case Family::Cyclic: return fmt::format("Z/{}", parameter);
    case Family::FreeAbelian: return parameter == 1 ? "Z" : fmt::format("Z^{}", parameter);
    case Family::Heisenberg3: return "H3";
    case Family::Dihedral: return fmt::format("D{}", parameter);
    case Family::FiniteTable: return table_name;
    }
    return "?";
}

Group::Group(GroupId id, std::size_t ball_budget) : id_(std::move(id)), budget_(ball_budget)
{
    if (id_.family == Family::FiniteTable) {
        if (id_.table_name == "S3") {
            auto t = make_s3();
            std::size_t n = t.perms.size();
            table_.assign(n, std::vector<int>(n));
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b) {
                    std::array<int, 3> c{};
                    for (int i = 0; i < 3; ++i)
                        c[i] = t.perms[a][t.perms[b][i] - 1];
                    auto it = std::find(t.perms.begin(), t.perms.end(), c);
                    table_[a][b] = static_cast<int>(it - t.perms.begin());
                }
            table_names_ = t.names;
        } else if (id_.table_name == "Q8") {
            table_.assign(8, std::vector<int>(8));
            for (int a = 0; a < 8; ++a)
                for (int b = 0; b < 8; ++b)
                    table_[a][b] = quaternion_product(a, b);
            table_names_ = {"1", "-1", "i", "-i", "j", "-j", "k", "-k"};
        } else {
            throw StructuralError("unknown finite table group '" + id_.table_name + "'");
        }
        table_inverse_.assign(table_.size(), -1);
        for (std::size_t a = 0; a < table_.size(); ++a)
            for (std::size_t b = 0; b < table_.size(); ++b)
                if (table_[a][b] == 0)
                    table_inverse_[a] = static_cast<int>(b);
    }
    layers_.push_back({identity()});
    bfs_lengths_.emplace(identity(), 0);
}

std::string Group::name() const
{
    std::string base = id_.catalog_name();
    if (id_.default_generators)
        return base;
    std::vector<std::string> parts;
    for (const auto& g : id_.generators)
        if (!is_identity(g))
            parts.push_back(format(g));
    std::sort(parts.begin(), parts.end());
    std::string joined;
    for (const auto& p : parts)
        joined += (joined.empty() ? "" : ";") + p;
    return base + "[" + joined + "]";
}

bool Group::is_finite() const
{
    return id_.family == Family::Cyclic || id_.family == Family::Dihedral ||
           id_.family == Family::FiniteTable;
}

std::optional<std::size_t> Group::order() const
{
    switch (id_.family) {
    case Family::Cyclic: return static_cast<std::size_t>(id_.parameter);
    case Family::Dihedral: return static_cast<std::size_t>(2 * id_.parameter);
    case Family::FiniteTable: return table_.size();
    default: return std::nullopt;
    }
}

bool Group::is_abelian() const
{
    switch (id_.family) {
    case Family::Cyclic:
    case Family::FreeAbelian: return true;
    case Family::Dihedral: return id_.parameter <= 2;
    default: return false;
    }
}

GroupElement Group::identity() const
{
    switch (id_.family) {
    case Family::Cyclic: return GroupElement{0};
    case Family::FreeAbelian: return GroupElement(std::vector<Coord>(id_.parameter, 0));
    case Family::Heisenberg3: return GroupElement{0, 0, 0};
    case Family::Dihedral: return GroupElement{0, 0};
    case Family::FiniteTable: return GroupElement{0};
    }
    return {};
}

void Group::validate(const GroupElement& x) const
{
    auto fail = [&](const std::string& why) {
        std::string coords;
        for (Coord c : x.nf)
            coords += (coords.empty() ? "" : ",") + std::to_string(c);
        throw StructuralError(fmt::format("element ({}) is not valid for {}: {}", coords,
                                          id_.catalog_name(), why));
    };
    switch (id_.family) {
    case Family::Cyclic:
        if (x.nf.size() != 1)
            fail("expected one coordinate");
        if (x.nf[0] < 0 || x.nf[0] >= id_.parameter)
            fail("residue out of range");
        break;
    case Family::FreeAbelian:
        if (x.nf.size() != static_cast<std::size_t>(id_.parameter))
            fail("wrong tuple length");
        break;
    case Family::Heisenberg3:
        if (x.nf.size() != 3)
            fail("expected (a,b,c)");
        break;
    case Family::Dihedral:
        if (x.nf.size() != 2)
            fail("expected (rotation,flip)");
        if (x.nf[0] < 0 || x.nf[0] >= id_.parameter || (x.nf[1] != 0 && x.nf[1] != 1))
            fail("component out of range");
        break;
    case Family::FiniteTable:
        if (x.nf.size() != 1 || x.nf[0] < 0 || x.nf[0] >= static_cast<Coord>(table_.size()))
            fail("table index out of range");
        break;
    }
}

GroupElement Group::multiply(const GroupElement& x, const GroupElement& y) const
{
    validate(x);
    validate(y);
    switch (id_.family) {
    case Family::Cyclic: return GroupElement{mod(x.nf[0] + y.nf[0], id_.parameter)};
    case Family::FreeAbelian: {
        GroupElement z = x;
        for (std::size_t i = 0; i < z.nf.size(); ++i)
            z.nf[i] += y.nf[i];
        return z;
    }
    case Family::Heisenberg3:
        return GroupElement{x.nf[0] + y.nf[0], x.nf[1] + y.nf[1], x.nf[2] + y.nf[2] + x.nf[0] * y.nf[1]};
    case Family::Dihedral: {
        Coord r = x.nf[1] == 0 ? x.nf[0] + y.nf[0] : x.nf[0] - y.nf[0];
        return GroupElement{mod(r, id_.parameter), (x.nf[1] + y.nf[1]) % 2};
    }
    case Family::FiniteTable: return GroupElement{table_[x.nf[0]][y.nf[0]]};
    }
    return {};
}

GroupElement Group::inverse(const GroupElement& x) const
{
    validate(x);
    switch (id_.family) {
    case Family::Cyclic: return GroupElement{mod(-x.nf[0], id_.parameter)};
    case Family::FreeAbelian: {
        GroupElement z = x;
        for (auto& c : z.nf)
            c = -c;
        return z;
    }
    case Family::Heisenberg3: return GroupElement{-x.nf[0], -x.nf[1], -x.nf[2] + x.nf[0] * x.nf[1]};
    case Family::Dihedral:
        return x.nf[1] == 0 ? GroupElement{mod(-x.nf[0], id_.parameter), 0} : x;
    case Family::FiniteTable: return GroupElement{table_inverse_[x.nf[0]]};
    }
    return {};
}

bool Group::has_closed_form_length() const
{
    if (!id_.default_generators)
        return false;
    return id_.family == Family::FreeAbelian || id_.family == Family::Cyclic;
}

std::optional<int> Group::closed_form_length(const GroupElement& x) const
{
    if (!has_closed_form_length())
        return std::nullopt;
    if (id_.family == Family::FreeAbelian) {
        Coord s = 0;
        for (Coord c : x.nf)
            s += std::abs(c);
        return static_cast<int>(s);
    }
    Coord k = x.nf[0];
    return static_cast<int>(std::min(k, id_.parameter - k));
}

void Group::extend_bfs_locked(int radius) const
{
    while (static_cast<int>(layers_.size()) <= radius && !exhausted_) {
        std::vector<GroupElement> next;
        const int len = static_cast<int>(layers_.size());
        for (const auto& x : layers_.back()) {
            for (const auto& g : id_.generators) {
                GroupElement y = multiply(x, g);
                if (bfs_lengths_.emplace(y, len).second) {
                    next.push_back(std::move(y));
                    if (bfs_lengths_.size() > budget_)
                        throw ResourceError(fmt::format(
                            "ball budget of {} elements exceeded while enumerating radius {} of {}",
                            budget_, len, name()));
                }
            }
        }
        if (next.empty()) {
            exhausted_ = true;
            break;
        }
        layers_.push_back(std::move(next));
    }
}

int Group::stabilization_radius_locked() const
{
    return static_cast<int>(layers_.size()) - 1;
}

int Group::bfs_word_length(const GroupElement& x) const
{
    validate(x);
    std::lock_guard lock(mutex_);
    while (true) {
        auto it = bfs_lengths_.find(x);
        if (it != bfs_lengths_.end())
            return it->second;
        if (exhausted_)
            throw StructuralError("element not reachable from the generating set");
        extend_bfs_locked(static_cast<int>(layers_.size()));
    }
}

int Group::word_length(const GroupElement& x) const
{
    validate(x);
    if (auto c = closed_form_length(x))
        return *c;
    return bfs_word_length(x);
}

std::shared_ptr<const BallIndex> Group::ball_index(int n) const
{
    if (n < 0)
        throw PreconditionError("ball radius must be nonnegative");
    std::lock_guard lock(mutex_);
    extend_bfs_locked(n);
    int effective = exhausted_ ? std::min(n, stabilization_radius_locked()) : n;
    if (auto it = ball_cache_.find(effective); it != ball_cache_.end())
        return it->second;
    auto ball = std::make_shared<BallIndex>();
    ball->radius = effective;
    for (int r = 0; r <= effective; ++r)
        for (const auto& x : layers_[r])
            ball->elements.push_back(x);
    std::sort(ball->elements.begin(), ball->elements.end());
    ball->lengths.reserve(ball->elements.size());
    for (std::size_t i = 0; i < ball->elements.size(); ++i) {
        ball->lengths.push_back(bfs_lengths_.at(ball->elements[i]));
        ball->index.emplace(ball->elements[i], i);
    }
    ball_cache_.emplace(effective, ball);
    return ball;
}

std::vector<GroupElement> Group::enumerate_ball(int n) const
{
    return ball_index(n)->elements;
}

std::vector<GroupElement> Group::all_elements() const
{
    if (!is_finite())
        throw PreconditionError(name() + " is infinite");
    return ball_index(static_cast<int>(*order()))->elements;
}

int Group::diameter() const
{
    if (!is_finite())
        throw PreconditionError(name() + " is infinite");
    return ball_index(static_cast<int>(*order()))->radius;
}

std::string Group::format(const GroupElement& x) const
{
    if (id_.family == Family::FiniteTable)
        return table_names_.at(static_cast<std::size_t>(x.nf.at(0)));
    if (x.nf.size() == 1)
        return std::to_string(x.nf[0]);
    std::string s = "(";
    for (std::size_t i = 0; i < x.nf.size(); ++i)
        s += (i ? "," : "") + std::to_string(x.nf[i]);
    return s + ")";
}

GroupElement Group::parse(std::string_view text) const
{
    std::string t = trim(text);
    if (id_.family == Family::FiniteTable) {
        for (std::size_t i = 0; i < table_names_.size(); ++i)
            if (table_names_[i] == t)
                return GroupElement{static_cast<Coord>(i)};
    }
    std::string body = t;
    if (!body.empty() && body.front() == '(' && body.back() == ')')
        body = body.substr(1, body.size() - 2);
    GroupElement x;
    std::stringstream ss(body);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part = trim(part);
        Coord v = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || ptr != part.data() + part.size())
            throw StructuralError(fmt::format("cannot parse element '{}' for {}", t, name()));
        x.nf.push_back(v);
    }
    if (id_.family == Family::Cyclic && x.nf.size() == 1)
        x.nf[0] = mod(x.nf[0], id_.parameter);
    validate(x);
    return x;
}

GroupPtr make_group(std::string_view catalog_id, std::string_view generators, std::size_t ball_budget)
{
    std::string id = trim(catalog_id);
    GroupId gid;
    auto parse_int = [&](std::string_view s) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw StructuralError("unknown group id '" + id + "'");
        return v;
    };
    if (id == "Z") {
        gid.family = Family::FreeAbelian;
        gid.parameter = 1;
    } else if (id.rfind("Z^", 0) == 0) {
        gid.family = Family::FreeAbelian;
        gid.parameter = parse_int(std::string_view(id).substr(2));
        if (gid.parameter < 1)
            throw StructuralError("Z^d requires d >= 1");
    } else if (id.rfind("Z/", 0) == 0) {
        gid.family = Family::Cyclic;
        gid.parameter = parse_int(std::string_view(id).substr(2));
        if (gid.parameter < 1)
            throw StructuralError("Z/m requires m >= 1");
    } else if (id == "H3") {
        gid.family = Family::Heisenberg3;
    } else if (id == "S3" || id == "Q8") {
        gid.family = Family::FiniteTable;
        gid.table_name = id;
    } else if (id.size() > 1 && id[0] == 'D') {
        gid.family = Family::Dihedral;
        gid.parameter = parse_int(std::string_view(id).substr(1));
        if (gid.parameter < 2)
            throw StructuralError("Dn requires n >= 2");
    } else {
        throw StructuralError("unknown group id '" + id + "'");
    }

    auto group = std::make_shared<Group>(gid, ball_budget);
    std::vector<GroupElement> gens;
    std::string gen_text = trim(generators);
    if (gen_text.empty() || gen_text == "default") {
        switch (gid.family) {
        case Family::Cyclic:
            gens.push_back(GroupElement{1 % gid.parameter});
            break;
        case Family::FreeAbelian:
            for (int i = 0; i < gid.parameter; ++i) {
                std::vector<Coord> e(gid.parameter, 0);
                e[i] = 1;
                gens.emplace_back(e);
            }
            break;
        case Family::Heisenberg3:
            gens = {GroupElement{1, 0, 0}, GroupElement{0, 1, 0}};
            break;
        case Family::Dihedral:
            gens = {GroupElement{1, 0}, GroupElement{0, 1}};
            break;
        case Family::FiniteTable:
            if (gid.table_name == "S3")
                gens = {group->parse("(12)"), group->parse("(23)")};
            else
                gens = {group->parse("i"), group->parse("j")};
            break;
        }
    } else {
        gid.default_generators = false;
        std::stringstream ss(gen_text);
        std::string part;
        while (std::getline(ss, part, ';'))
            if (!trim(part).empty())
                gens.push_back(group->parse(part));
    }

    // symmetric closure with the identity
    std::vector<GroupElement> closed{group->identity()};
    for (const auto& g : gens) {
        closed.push_back(g);
        closed.push_back(group->inverse(g));
    }
    std::sort(closed.begin(), closed.end());
    closed.erase(std::unique(closed.begin(), closed.end()), closed.end());
    gid.generators = closed;

    auto result = std::make_shared<Group>(gid, ball_budget);

    // generation check
    if (result->is_finite()) {
        std::size_t reached = result->ball_index(static_cast<int>(*result->order()))->size();
        if (reached != *result->order())
            throw StructuralError(fmt::format("generators reach only {} of {} elements of {}", reached,
                                              *result->order(), gid.catalog_name()));
    } else {
        int d = gid.family == Family::FreeAbelian ? gid.parameter : 2;
        std::vector<std::vector<Coord>> rows;
        for (const auto& g : closed)
            rows.emplace_back(g.nf.begin(), g.nf.begin() + d);
        if (!generates_lattice(rows, d))
            throw StructuralError("generators do not generate " + gid.catalog_name());
    }
    return result;
}

}  // namespace qtrunc
