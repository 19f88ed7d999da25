#include "qtrunc/classical_group.hpp"

#include <cstdlib>
#include <fstream>
#include <mutex>
#include <random>

#include <fmt/format.h>

#include "qtrunc/errors.hpp"
#include "qtrunc/lipnorms.hpp"

namespace qtrunc {

namespace {

Cyclotomic parse_cyclotomic(const nlohmann::json& j, int order)
{
    std::vector<Rational> c;
    c.reserve(j.size());
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2)
            throw StructuralError("group data: coefficient must be a [num, den] pair");
        Rational num(pair[0].get<long long>()), den(pair[1].get<long long>());
        if (den == 0)
            throw StructuralError("group data: zero denominator");
        c.push_back(num / den);
    }
    return Cyclotomic::from_powers(order, c);
}

CycMatrix matmul(const CycMatrix& a, const CycMatrix& b)
{
    const std::size_t n = a.size();
    CycMatrix out(n, std::vector<Cyclotomic>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            if (a[i][k].is_zero())
                continue;
            for (std::size_t j = 0; j < n; ++j)
                out[i][j] += a[i][k] * b[k][j];
        }
    return out;
}

bool is_identity_matrix(const CycMatrix& m)
{
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            if (m[i][j] != Cyclotomic(i == j ? 1L : 0L))
                return false;
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// FiniteGroupData

std::string FiniteGroupData::data_file()
{
    if (const char* env = std::getenv("QTRUNC_DATA_DIR"); env && *env)
        return std::string(env) + "/groups.json";
    return std::string(QTRUNC_DATA_DIR) + "/groups.json";
}

FiniteGroupPtr FiniteGroupData::load(std::string_view name, std::string_view generators)
{
    static std::mutex mutex;
    static std::map<std::string, FiniteGroupPtr> cache;
    static std::optional<nlohmann::json> document;

    std::lock_guard lock(mutex);
    std::string key = std::string(name) + "|" + std::string(generators);
    if (auto it = cache.find(key); it != cache.end())
        return it->second;
    if (!document) {
        std::ifstream in(data_file());
        if (!in)
            throw ResourceError("cannot open group data file " + data_file());
        document = nlohmann::json::parse(in);
        if (document->value("version", 0) != 1)
            throw StructuralError("unsupported group data version in " + data_file());
    }
    GroupPtr group = make_group(name, generators);
    for (const auto& entry : document->at("groups")) {
        if (entry.at("name").get<std::string>() == group->id().catalog_name()) {
            auto data = from_json(entry, group);
            cache.emplace(key, data);
            return data;
        }
    }
    throw PreconditionError("no representation data for group " + std::string(name));
}

FiniteGroupPtr FiniteGroupData::from_json(const nlohmann::json& entry, GroupPtr group)
{
    auto d = std::make_shared<FiniteGroupData>();
    d->group_ = std::move(group);
    const int field = entry.at("field_order").get<int>();
    for (const auto& e : entry.at("elements"))
        d->elements_.emplace_back(e.get<std::vector<Coord>>());
    const std::size_t n = d->elements_.size();
    for (std::size_t i = 0; i < n; ++i)
        d->index_[d->elements_[i]] = i;
    if (d->index_.size() != n)
        throw StructuralError("group data: repeated element");
    if (!d->group_->is_finite() || *d->group_->order() != n || d->group_->all_elements() != d->elements_)
        throw StructuralError("group data: element list does not match " + d->group_->name());
    const auto& names = entry.at("names");
    for (std::size_t i = 0; i < n; ++i)
        if (names.at(i).get<std::string>() != d->group_->format(d->elements_[i]))
            throw StructuralError("group data: element name mismatch at index " + std::to_string(i));

    d->table_.assign(n, std::vector<std::size_t>(n));
    d->inverse_.assign(n, 0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            auto t = entry.at("table").at(a).at(b).get<std::size_t>();
            if (t >= n || d->elements_[t] != d->group_->multiply(d->elements_[a], d->elements_[b]))
                throw StructuralError(fmt::format("group data: Cayley table disagrees at ({}, {})", a, b));
            d->table_[a][b] = t;
            if (d->elements_[t] == d->group_->identity())
                d->inverse_[a] = b;
        }

    for (const auto& jr : entry.at("irreps")) {
        Irrep r;
        r.label = jr.at("label").get<std::string>();
        r.dim = jr.at("dim").get<int>();
        for (const auto& jm : jr.at("matrices")) {
            CycMatrix m;
            for (const auto& row : jm) {
                std::vector<Cyclotomic> mrow;
                for (const auto& e : row)
                    mrow.push_back(parse_cyclotomic(e, field));
                m.push_back(std::move(mrow));
            }
            if (m.size() != static_cast<std::size_t>(r.dim))
                throw StructuralError("group data: matrix of wrong size for " + r.label);
            r.matrices.push_back(std::move(m));
        }
        if (r.matrices.size() != n)
            throw StructuralError("group data: irrep " + r.label + " has the wrong number of matrices");
        for (const auto& m : r.matrices) {
            Cyclotomic tr;
            for (int i = 0; i < r.dim; ++i)
                tr += m[i][i];
            r.character.push_back(tr);
        }
        d->irreps_.push_back(std::move(r));
    }
    for (const auto& jc : entry.at("characters")) {
        const Irrep& r = d->irrep(jc.at("label").get<std::string>());
        for (std::size_t i = 0; i < n; ++i)
            if (parse_cyclotomic(jc.at("values").at(i), field) != r.character[i])
                throw StructuralError("group data: character table disagrees with traces for " + r.label);
    }
    d->validate();
    for (const auto& r : d->irreps_) {
        bool trivial = true;
        for (const auto& c : r.character)
            trivial = trivial && c == Cyclotomic(1L);
        if (trivial)
            d->trivial_ = r.label;
    }
    if (d->trivial_.empty())
        throw StructuralError("group data: no trivial representation");
    return d;
}

void FiniteGroupData::validate() const
{
    const std::size_t n = order();
    std::size_t dim_squares = 0;
    for (const auto& r : irreps_) {
        dim_squares += static_cast<std::size_t>(r.dim * r.dim);
        for (std::size_t a = 0; a < n; ++a) {
            // unitarity: M M^* = I
            CycMatrix adj(r.dim, std::vector<Cyclotomic>(r.dim));
            for (int i = 0; i < r.dim; ++i)
                for (int j = 0; j < r.dim; ++j)
                    adj[i][j] = r.matrices[a][j][i].conj();
            if (!is_identity_matrix(matmul(r.matrices[a], adj)))
                throw StructuralError(fmt::format("group data: {} is not unitary at element {}", r.label, a));
            for (std::size_t b = 0; b < n; ++b) {
                auto prod = matmul(r.matrices[a], r.matrices[b]);
                if (prod != r.matrices[table_[a][b]])
                    throw StructuralError(
                        fmt::format("group data: {} is not multiplicative at ({}, {})", r.label, a, b));
            }
        }
    }
    if (dim_squares != n)
        throw StructuralError("group data: squared dimensions do not sum to the order");
    for (std::size_t i = 0; i < irreps_.size(); ++i)
        for (std::size_t j = 0; j < irreps_.size(); ++j)
            if (character_inner(irreps_[i].character, irreps_[j].character) != Cyclotomic(i == j ? 1L : 0L))
                throw StructuralError("group data: characters are not orthonormal");
    // column orthogonality: sum_gamma conj(chi(a)) chi(b) = |C(a)| [a ~ b]
    for (std::size_t a = 0; a < n; ++a) {
        std::size_t centralizer = 0;
        for (std::size_t g = 0; g < n; ++g)
            if (table_[g][a] == table_[a][g])
                ++centralizer;
        for (std::size_t b = 0; b < n; ++b) {
            bool conjugate = false;
            for (std::size_t g = 0; g < n && !conjugate; ++g)
                conjugate = table_[table_[g][a]][inverse_[g]] == b;
            Cyclotomic s;
            for (const auto& r : irreps_)
                s += r.character[a].conj() * r.character[b];
            if (s != Cyclotomic(conjugate ? static_cast<long>(centralizer) : 0L))
                throw StructuralError("group data: column orthogonality fails");
        }
    }
}

std::size_t FiniteGroupData::index_of(const GroupElement& x) const
{
    auto it = index_.find(x);
    if (it == index_.end())
        throw StructuralError("element is not in " + group_->name());
    return it->second;
}

int FiniteGroupData::distance(std::size_t a, std::size_t b) const
{
    return group_->word_length(elements_[table_[inverse_[a]][b]]);
}

const Irrep& FiniteGroupData::irrep(std::string_view label) const
{
    for (const auto& r : irreps_)
        if (r.label == label)
            return r;
    throw PreconditionError(fmt::format("unknown irrep label '{}' for {}", label, group_->name()));
}

std::vector<std::string> FiniteGroupData::labels() const
{
    std::vector<std::string> out;
    for (const auto& r : irreps_)
        out.push_back(r.label);
    return out;
}

std::string FiniteGroupData::conjugate_label(std::string_view label) const
{
    const Irrep& r = irrep(label);
    std::vector<Cyclotomic> conj;
    for (const auto& c : r.character)
        conj.push_back(c.conj());
    for (const auto& s : irreps_)
        if (s.character == conj)
            return s.label;
    throw StructuralError("conjugate of " + std::string(label) + " missing from the catalog");
}

Cyclotomic FiniteGroupData::character_inner(const std::vector<Cyclotomic>& chi,
                                            const std::vector<Cyclotomic>& psi) const
{
    Cyclotomic s;
    for (std::size_t g = 0; g < order(); ++g)
        s += chi[g].conj() * psi[g];
    return s * Cyclotomic(Rational(1, static_cast<long>(order())));
}

// ---------------------------------------------------------------------------
// FunctionOnG

FunctionOnG::FunctionOnG(FiniteGroupPtr g, std::vector<Cyclotomic> values)
    : g_(std::move(g)), exact_(true), exact_values_(std::move(values))
{
    if (exact_values_.size() != g_->order())
        throw StructuralError("function length differs from the group order");
}

FunctionOnG::FunctionOnG(FiniteGroupPtr g, std::vector<Complex> values)
    : g_(std::move(g)), exact_(false), values_(std::move(values))
{
    if (values_.size() != g_->order())
        throw StructuralError("function length differs from the group order");
}

FunctionOnG FunctionOnG::delta(FiniteGroupPtr g, const GroupElement& x)
{
    std::vector<Cyclotomic> v(g->order());
    v[g->index_of(x)] = Cyclotomic(1L);
    return FunctionOnG(std::move(g), std::move(v));
}

FunctionOnG FunctionOnG::constant(FiniteGroupPtr g, const Rational& c)
{
    std::vector<Cyclotomic> v(g->order(), Cyclotomic(c));
    return FunctionOnG(std::move(g), std::move(v));
}

const std::vector<Cyclotomic>& FunctionOnG::exact_values() const
{
    if (!exact_)
        throw PreconditionError("function has no exact values");
    return exact_values_;
}

std::vector<Complex> FunctionOnG::values() const
{
    if (!exact_)
        return values_;
    std::vector<Complex> out;
    out.reserve(exact_values_.size());
    for (const auto& v : exact_values_)
        out.push_back(v.to_complex());
    return out;
}

std::vector<double> FunctionOnG::real_values() const
{
    std::vector<double> out;
    if (exact_) {
        for (const auto& v : exact_values_) {
            if (v != v.conj())
                throw PreconditionError("function is not real valued");
            out.push_back(v.to_complex().real());
        }
    } else {
        for (const auto& v : values_) {
            if (v.imag() != 0.0)
                throw PreconditionError("function is not real valued");
            out.push_back(v.real());
        }
    }
    return out;
}

std::vector<Rational> FunctionOnG::rational_values() const
{
    std::vector<Rational> out;
    for (const auto& v : exact_values())
        out.push_back(v.to_rational());
    return out;
}

bool FunctionOnG::is_real() const
{
    if (exact_) {
        for (const auto& v : exact_values_)
            if (v != v.conj())
                return false;
        return true;
    }
    for (const auto& v : values_)
        if (v.imag() != 0.0)
            return false;
    return true;
}

FunctionOnG FunctionOnG::translate(std::size_t z) const
{
    const std::size_t n = size();
    if (exact_) {
        std::vector<Cyclotomic> v(n);
        for (std::size_t y = 0; y < n; ++y)
            v[y] = exact_values_[g_->mul(z, y)];
        return FunctionOnG(g_, std::move(v));
    }
    std::vector<Complex> v(n);
    for (std::size_t y = 0; y < n; ++y)
        v[y] = values_[g_->mul(z, y)];
    return FunctionOnG(g_, std::move(v));
}

FunctionOnG FunctionOnG::operator+(const FunctionOnG& o) const
{
    if (g_ != o.g_)
        throw StructuralError("functions live on different groups");
    if (exact_ && o.exact_) {
        std::vector<Cyclotomic> v(size());
        for (std::size_t i = 0; i < size(); ++i)
            v[i] = exact_values_[i] + o.exact_values_[i];
        return FunctionOnG(g_, std::move(v));
    }
    auto a = values(), b = o.values();
    for (std::size_t i = 0; i < a.size(); ++i)
        a[i] += b[i];
    return FunctionOnG(g_, std::move(a));
}

FunctionOnG FunctionOnG::operator-(const FunctionOnG& o) const
{
    return *this + o.scaled(Cyclotomic(-1L));
}

FunctionOnG FunctionOnG::scaled(const Cyclotomic& c) const
{
    if (exact_) {
        std::vector<Cyclotomic> v(size());
        for (std::size_t i = 0; i < size(); ++i)
            v[i] = exact_values_[i] * c;
        return FunctionOnG(g_, std::move(v));
    }
    auto v = values_;
    for (auto& x : v)
        x *= c.to_complex();
    return FunctionOnG(g_, std::move(v));
}

bool FunctionOnG::operator==(const FunctionOnG& o) const
{
    if (g_ != o.g_)
        return false;
    if (exact_ && o.exact_)
        return exact_values_ == o.exact_values_;
    return values() == o.values();
}

// ---------------------------------------------------------------------------
// Peter-Weyl

FunctionOnG isotypic_project(const FunctionOnG& f, std::string_view label)
{
    const auto& g = *f.group_data();
    const Irrep& r = g.irrep(label);
    const std::size_t n = g.order();
    if (f.is_exact()) {
        const Cyclotomic scale(Rational(r.dim, static_cast<long>(n)));
        const auto& fv = f.exact_values();
        std::vector<Cyclotomic> out(n);
        for (std::size_t x = 0; x < n; ++x) {
            Cyclotomic s;
            for (std::size_t h = 0; h < n; ++h)
                if (!fv[g.mul(g.inv(h), x)].is_zero())
                    s += r.character[h] * fv[g.mul(g.inv(h), x)];
            out[x] = s * scale;
        }
        return FunctionOnG(f.group_data(), std::move(out));
    }
    const double scale = static_cast<double>(r.dim) / static_cast<double>(n);
    auto fv = f.values();
    std::vector<Complex> out(n);
    for (std::size_t x = 0; x < n; ++x) {
        Complex s = 0.0;
        for (std::size_t h = 0; h < n; ++h)
            s += r.character[h].to_complex() * fv[g.mul(g.inv(h), x)];
        out[x] = s * scale;
    }
    return FunctionOnG(f.group_data(), std::move(out));
}

std::vector<std::pair<std::string, int>> fusion_decompose(const FiniteGroupData& g, std::string_view gamma,
                                                          std::string_view beta)
{
    const Irrep& a = g.irrep(gamma);
    const Irrep& b = g.irrep(beta);
    std::vector<Cyclotomic> prod(g.order());
    for (std::size_t i = 0; i < g.order(); ++i)
        prod[i] = a.character[i] * b.character[i];
    std::vector<std::pair<std::string, int>> out;
    for (const auto& r : g.irreps()) {
        Rational m = g.character_inner(r.character, prod).to_rational();
        if (denominator(m) != 1 || m < 0)
            throw StructuralError("non-integral fusion multiplicity");
        if (m != 0)
            out.emplace_back(r.label, static_cast<int>(numerator(m).convert_to<long>()));
    }
    return out;
}

IsotypicLabelSet make_label_set(const FiniteGroupData& g, std::set<std::string> labels)
{
    IsotypicLabelSet s;
    for (const auto& l : labels)
        g.irrep(l);
    s.labels = std::move(labels);
    s.contains_trivial = s.labels.count(g.trivial_label()) > 0;
    s.conjugate_closed = true;
    for (const auto& l : s.labels)
        s.conjugate_closed = s.conjugate_closed && s.labels.count(g.conjugate_label(l)) > 0;
    return s;
}

FiltrationResult filtration_sets(const FiniteGroupData& g, const IsotypicLabelSet& s, int n)
{
    if (n < 0)
        throw PreconditionError("filtration level must be nonnegative");
    IsotypicLabelSet checked = make_label_set(g, s.labels);
    if (!checked.contains_trivial)
        throw PreconditionError("generating label set must contain the trivial label");
    if (!checked.conjugate_closed)
        throw PreconditionError("generating label set must be closed under conjugation");
    // faithful: only the identity acts trivially in every representation of S
    for (std::size_t x = 0; x < g.order(); ++x) {
        if (g.elements()[x] == g.group()->identity())
            continue;
        bool acts_trivially = true;
        for (const auto& l : checked.labels)
            acts_trivially = acts_trivially && is_identity_matrix(g.irrep(l).matrices[x]);
        if (acts_trivially)
            throw PreconditionError("label set is not faithful: filtration will not exhaust");
    }

    std::vector<std::set<std::string>> levels{{g.trivial_label()}};
    auto step = [&](const std::set<std::string>& prev) {
        std::set<std::string> next;
        for (const auto& a : prev)
            for (const auto& b : checked.labels)
                for (const auto& [c, m] : fusion_decompose(g, a, b))
                    next.insert(c);
        return next;
    };
    int stab = -1;
    for (int k = 0; stab < 0 || k < n; ++k) {
        auto next = step(levels.back());
        if (stab < 0 && next == levels.back())
            stab = k;
        levels.push_back(std::move(next));
    }
    FiltrationResult res;
    res.set = make_label_set(g, levels[static_cast<std::size_t>(n)]);
    res.stabilization_level = stab;
    return res;
}

int min_level_labels(const FiniteGroupData& g, const IsotypicLabelSet& s, const std::set<std::string>& f)
{
    auto full = filtration_sets(g, s, 0);
    for (int n = 0; n <= full.stabilization_level; ++n) {
        auto level = filtration_sets(g, s, n).set.labels;
        if (std::includes(level.begin(), level.end(), f.begin(), f.end()))
            return n;
    }
    throw PreconditionError("labels are outside the filtration");
}

// ---------------------------------------------------------------------------
// Lipschitz constants and induced norms

Rational lipschitz_constant_exact(const FunctionOnG& f)
{
    auto v = f.rational_values();
    const auto& g = *f.group_data();
    Rational best = 0;
    for (std::size_t x = 0; x < v.size(); ++x)
        for (std::size_t y = x + 1; y < v.size(); ++y) {
            Rational q = abs(v[x] - v[y]) / g.distance(x, y);
            if (q > best)
                best = q;
        }
    return best;
}

double lipschitz_constant(const FunctionOnG& f)
{
    auto v = f.values();
    const auto& g = *f.group_data();
    double best = 0.0;
    for (std::size_t x = 0; x < v.size(); ++x)
        for (std::size_t y = x + 1; y < v.size(); ++y)
            best = std::max(best, std::abs(v[x] - v[y]) / g.distance(x, y));
    return best;
}

double induced_lipnorm_translation(const LipNormSpec& lip, const FunctionOnG& f)
{
    double best = 0.0;
    for (std::size_t z = 0; z < f.group_data()->order(); ++z)
        best = std::max(best, lip_eval(lip, f.translate(z)).upper);
    return best;
}

Rational induced_lipnorm_translation_exact(const FunctionOnG& f)
{
    Rational best = 0;
    for (std::size_t z = 0; z < f.group_data()->order(); ++z) {
        Rational v = lipschitz_constant_exact(f.translate(z));
        if (v > best)
            best = v;
    }
    return best;
}

HomogeneousReport homogeneous_restriction_check(const FiniteGroupData& g, const std::vector<GroupElement>& subgroup,
                                                std::size_t samples, std::uint64_t seed,
                                                CosetOrientation orientation)
{
    const std::size_t n = g.order();
    std::set<std::size_t> h;
    for (const auto& x : subgroup)
        h.insert(g.index_of(x));
    h.insert(g.index_of(g.group()->identity()));
    for (auto a : h)
        for (auto b : h)
            if (!h.count(g.mul(a, b)))
                throw PreconditionError("subgroup is not closed under multiplication");

    const bool left = orientation == CosetOrientation::LeftInvariant;
    // cosets Hx (left-invariant functions) or xH (right-invariant functions)
    std::vector<int> coset_of(n, -1);
    int cosets = 0;
    for (std::size_t x = 0; x < n; ++x) {
        if (coset_of[x] >= 0)
            continue;
        for (auto k : h)
            coset_of[left ? g.mul(k, x) : g.mul(x, k)] = cosets;
        ++cosets;
    }
    auto invariant = [&](const std::vector<Rational>& f) {
        for (std::size_t x = 0; x < n; ++x)
            for (auto k : h)
                if (f[left ? g.mul(k, x) : g.mul(x, k)] != f[x])
                    return false;
        return true;
    };
    std::vector<std::vector<Rational>> basis;
    for (int c = 0; c < cosets; ++c) {
        std::vector<Rational> f(n, Rational(0));
        for (std::size_t x = 0; x < n; ++x)
            if (coset_of[x] == c)
                f[x] = 1;
        basis.push_back(std::move(f));
    }
    // coaction check: x -> f(x y) stays in B for every y
    for (const auto& f : basis)
        for (std::size_t y = 0; y < n; ++y) {
            std::vector<Rational> shifted(n);
            for (std::size_t x = 0; x < n; ++x)
                shifted[x] = f[g.mul(x, y)];
            if (!invariant(shifted))
                throw PreconditionError(
                    "the comultiplication does not map B into B (x) A: use left-invariant functions");
        }

    HomogeneousReport report;
    report.basis_size = basis.size();
    std::vector<std::vector<Rational>> tests = basis;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coeff(-9, 9);
    for (std::size_t s = 0; s < samples; ++s) {
        std::vector<Rational> f(n, Rational(0));
        for (const auto& b : basis) {
            Rational c(coeff(rng), 1 + (coeff(rng) + 9) % 4);
            for (std::size_t x = 0; x < n; ++x)
                f[x] += c * b[x];
        }
        tests.push_back(std::move(f));
    }
    report.samples = samples;
    auto to_function = [&](const std::vector<Rational>& f) {
        std::vector<Cyclotomic> v;
        for (const auto& r : f)
            v.emplace_back(r);
        return FunctionOnG(FiniteGroupPtr(&g, [](const FiniteGroupData*) {}), std::move(v));
    };
    for (const auto& f : tests) {
        FunctionOnG fn = to_function(f);
        Rational induced = induced_lipnorm_translation_exact(fn);
        Rational restricted = lipschitz_constant_exact(fn);
        report.values.emplace_back(induced, restricted);
        Rational d = abs(induced - restricted);
        if (d > report.max_discrepancy)
            report.max_discrepancy = d;
    }
    return report;
}

}  // namespace qtrunc
