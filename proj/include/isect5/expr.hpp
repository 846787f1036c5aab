#pragma once

// Closed-form expressions in u1..u4: parsing, exact symbolic differentiation,
// memoized mixed partials up to order 5, and a compiled evaluator.

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <initializer_list>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "isect5/errors.hpp"

namespace isect5::expr {

enum class Op : std::uint8_t { Number, Param, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Tan, Exp, Ln, Sqrt };

inline bool is_function(Op op) { return op >= Op::Sin; }
inline bool is_binary(Op op) { return op >= Op::Add && op <= Op::Pow; }

struct Node {
    Op op = Op::Number;
    double value = 0.0;          // Number
    int param = 0;               // Param, 1..4
    bool constant = true;        // no parameter reference in this subtree
    bool const_exponent = false; // Pow whose exponent is parameter-free
    bool int_exponent = false;   // Pow whose exponent is an integer literal
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

using Ast = std::shared_ptr<const Node>;

namespace detail {

inline Ast make(Op op, Ast lhs = nullptr, Ast rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->constant = (!lhs || lhs->constant) && (!rhs || rhs->constant);
    if (op == Op::Pow) {
        n->const_exponent = rhs->constant;
        n->int_exponent = rhs->op == Op::Number && std::nearbyint(rhs->value) == rhs->value;
    }
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

/// Unchecked arithmetic used for constant folding; may return non-finite values.
inline double apply_raw(Op op, double x, double y) {
    switch (op) {
    case Op::Neg: return -x;
    case Op::Add: return x + y;
    case Op::Sub: return x - y;
    case Op::Mul: return x * y;
    case Op::Div: return y == 0.0 ? std::numeric_limits<double>::quiet_NaN() : x / y;
    case Op::Pow: return std::pow(x, y);
    case Op::Sin: return std::sin(x);
    case Op::Cos: return std::cos(x);
    case Op::Tan: return std::abs(std::cos(x)) < 1e-15 ? std::numeric_limits<double>::quiet_NaN() : std::tan(x);
    case Op::Exp: return std::exp(x);
    case Op::Ln: return x <= 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::log(x);
    case Op::Sqrt: return x < 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::sqrt(x);
    default: return std::numeric_limits<double>::quiet_NaN();
    }
}

inline const char* op_name(Op op) {
    switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Tan: return "tan";
    case Op::Exp: return "exp";
    case Op::Ln: return "ln";
    case Op::Sqrt: return "sqrt";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Pow: return "^";
    default: return "?";
    }
}

/// Checked arithmetic shared by the tree walker and the tape.
inline double apply_checked(Op op, double x, double y) {
    switch (op) {
    case Op::Div:
        if (y == 0.0) throw DomainError("division by zero");
        break;
    case Op::Ln:
        if (x <= 0.0) throw DomainError("ln of non-positive argument " + std::to_string(x));
        break;
    case Op::Sqrt:
        if (x < 0.0) throw DomainError("sqrt of negative argument " + std::to_string(x));
        break;
    case Op::Tan:
        if (std::abs(std::cos(x)) < 1e-15) throw DomainError("tan at a pole");
        break;
    default: break;
    }
    const double r = apply_raw(op, x, y);
    if (!std::isfinite(r)) throw DomainError(std::string("non-finite result from '") + op_name(op) + "'");
    return r;
}

inline bool is_number(const Ast& a, double v) { return a->op == Op::Number && a->value == v; }

} // namespace detail

// Builders with light simplification: constant folding and 0/1 identities.

inline Ast number(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Number;
    n->value = v;
    return n;
}

inline Ast param(int k) {
    if (k < 1 || k > 4) throw std::invalid_argument("parameter index must be in 1..4");
    auto n = std::make_shared<Node>();
    n->op = Op::Param;
    n->param = k;
    n->constant = false;
    return n;
}

namespace detail {
inline Ast fold_or_make(Op op, Ast a, Ast b = nullptr) {
    if (a->op == Op::Number && (!b || b->op == Op::Number)) {
        const double r = apply_raw(op, a->value, b ? b->value : 0.0);
        if (std::isfinite(r)) return number(r);
    }
    return make(op, std::move(a), std::move(b));
}
} // namespace detail

inline Ast neg(Ast a) {
    if (a->op == Op::Number) return number(-a->value);
    if (a->op == Op::Neg) return a->lhs;
    return detail::make(Op::Neg, std::move(a));
}

inline Ast add(Ast a, Ast b) {
    if (detail::is_number(a, 0.0)) return b;
    if (detail::is_number(b, 0.0)) return a;
    return detail::fold_or_make(Op::Add, std::move(a), std::move(b));
}

inline Ast sub(Ast a, Ast b) {
    if (detail::is_number(b, 0.0)) return a;
    if (detail::is_number(a, 0.0)) return neg(std::move(b));
    return detail::fold_or_make(Op::Sub, std::move(a), std::move(b));
}

inline Ast mul(Ast a, Ast b) {
    if (detail::is_number(a, 0.0) || detail::is_number(b, 0.0)) return number(0.0);
    if (detail::is_number(a, 1.0)) return b;
    if (detail::is_number(b, 1.0)) return a;
    if (detail::is_number(a, -1.0)) return neg(std::move(b));
    if (detail::is_number(b, -1.0)) return neg(std::move(a));
    return detail::fold_or_make(Op::Mul, std::move(a), std::move(b));
}

inline Ast div(Ast a, Ast b) {
    if (detail::is_number(a, 0.0) && !detail::is_number(b, 0.0)) return number(0.0);
    if (detail::is_number(b, 1.0)) return a;
    return detail::fold_or_make(Op::Div, std::move(a), std::move(b));
}

inline Ast pow(Ast a, Ast b) {
    if (detail::is_number(b, 0.0)) return number(1.0);
    if (detail::is_number(b, 1.0)) return a;
    return detail::fold_or_make(Op::Pow, std::move(a), std::move(b));
}

inline Ast apply(Op f, Ast a) {
    if (!is_function(f)) throw std::invalid_argument("not a function op");
    return detail::fold_or_make(f, std::move(a));
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    Ast parse() {
        Ast a = expr();
        skip_ws();
        if (pos_ != s_.size()) throw ParseError(pos_, "unexpected trailing input");
        return a;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Ast expr() {
        Ast a = term();
        for (;;) {
            if (accept('+')) a = make(Op::Add, a, term());
            else if (accept('-')) a = make(Op::Sub, a, term());
            else return a;
        }
    }

    Ast term() {
        Ast a = factor();
        for (;;) {
            if (accept('*')) a = make(Op::Mul, a, factor());
            else if (accept('/')) a = make(Op::Div, a, factor());
            else return a;
        }
    }

    Ast factor() {
        if (accept('-')) return make(Op::Neg, factor());
        Ast b = base();
        if (accept('^')) return make(Op::Pow, b, factor());
        return b;
    }

    Ast base() {
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError(pos_, "expected expression");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return literal();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        if (c == '(') {
            ++pos_;
            Ast a = expr();
            if (!accept(')')) throw ParseError(pos_, "expected ')'");
            return a;
        }
        throw ParseError(pos_, std::string("unexpected character '") + c + "'");
    }

    Ast literal() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++n;
            return n;
        };
        std::size_t n = digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            n += digits();
        }
        if (n == 0) throw ParseError(start, "malformed number");
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < s_.size() && (s_[look] == '+' || s_[look] == '-')) ++look;
            if (look < s_.size() && std::isdigit(static_cast<unsigned char>(s_[look]))) {
                pos_ = look;
                digits();
            }
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (ec != std::errc() || ptr != s_.data() + pos_) throw ParseError(start, "malformed number");
        return number(v);
    }

    Ast identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string_view id = s_.substr(start, pos_ - start);
        if (id.size() == 2 && id[0] == 'u' && id[1] >= '1' && id[1] <= '4') return param(id[1] - '0');
        if (id == "pi") return number(std::numbers::pi);
        if (id == "e") return number(std::numbers::e);

        static constexpr std::pair<std::string_view, Op> functions[] = {
            {"sin", Op::Sin}, {"cos", Op::Cos}, {"tan", Op::Tan},
            {"exp", Op::Exp}, {"ln", Op::Ln},   {"sqrt", Op::Sqrt},
        };
        for (const auto& [name, op] : functions) {
            if (id != name) continue;
            if (!accept('(')) throw ParseError(pos_, "expected '(' after " + std::string(name));
            Ast arg = expr();
            if (!accept(')')) throw ParseError(pos_, "expected ')'");
            return make(op, arg);
        }
        throw ParseError(start, "unknown identifier '" + std::string(id) + "'");
    }
};

} // namespace detail

inline Ast parse(std::string_view text) { return detail::Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Printing

namespace detail {
inline void unparse_into(const Node& n, std::string& out) {
    switch (n.op) {
    case Op::Number: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        if (n.value < 0 || std::signbit(n.value)) {
            out += "(";
            out += buf;
            out += ")";
        } else {
            out += buf;
        }
        return;
    }
    case Op::Param:
        out += 'u';
        out += static_cast<char>('0' + n.param);
        return;
    case Op::Neg:
        out += "(-";
        unparse_into(*n.lhs, out);
        out += ")";
        return;
    default: break;
    }
    if (is_function(n.op)) {
        out += op_name(n.op);
        out += "(";
        unparse_into(*n.lhs, out);
        out += ")";
        return;
    }
    out += "(";
    unparse_into(*n.lhs, out);
    out += op_name(n.op);
    unparse_into(*n.rhs, out);
    out += ")";
}
} // namespace detail

/// Fully parenthesized text that parse() accepts.
inline std::string unparse(const Ast& a) {
    std::string out;
    detail::unparse_into(*a, out);
    return out;
}

inline bool structurally_equal(const Ast& a, const Ast& b) {
    if (a == b) return true;
    if (!a || !b || a->op != b->op) return false;
    if (a->op == Op::Number) return a->value == b->value;
    if (a->op == Op::Param) return a->param == b->param;
    return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
}

// ---------------------------------------------------------------------------
// Evaluation

inline double evaluate(const Ast& a, std::span<const double, 4> u) {
    switch (a->op) {
    case Op::Number: return a->value;
    case Op::Param: return u[a->param - 1];
    default: break;
    }
    const double x = evaluate(a->lhs, u);
    const double y = a->rhs ? evaluate(a->rhs, u) : 0.0;
    return detail::apply_checked(a->op, x, y);
}

// ---------------------------------------------------------------------------
// Differentiation

namespace detail {

class Differentiator {
public:
    explicit Differentiator(int k) : k_(k) {}

    Ast d(const Ast& a) {
        if (a->constant) return number(0.0);
        if (auto it = memo_.find(a.get()); it != memo_.end()) return it->second.second;
        Ast r = compute(a);
        memo_.emplace(a.get(), std::pair{a, r});
        return r;
    }

private:
    int k_;
    // Keeps the key node alive so its address cannot be reused by a temporary.
    std::unordered_map<const Node*, std::pair<Ast, Ast>> memo_;

    Ast compute(const Ast& a) {
        const Ast& x = a->lhs;
        const Ast& y = a->rhs;
        switch (a->op) {
        case Op::Param: return number(a->param == k_ ? 1.0 : 0.0);
        case Op::Neg: return neg(d(x));
        case Op::Add: return add(d(x), d(y));
        case Op::Sub: return sub(d(x), d(y));
        case Op::Mul: return add(mul(d(x), y), mul(x, d(y)));
        case Op::Div: return sub(div(d(x), y), div(mul(x, d(y)), mul(y, y)));
        case Op::Pow:
            if (a->const_exponent) return mul(mul(y, pow(x, sub(y, number(1.0)))), d(x));
            // Non-constant exponent: rewrite as exp(y*ln(x)).
            return d(apply(Op::Exp, mul(y, apply(Op::Ln, x))));
        case Op::Sin: return mul(apply(Op::Cos, x), d(x));
        case Op::Cos: return mul(neg(apply(Op::Sin, x)), d(x));
        case Op::Tan: return div(d(x), pow(apply(Op::Cos, x), number(2.0)));
        case Op::Exp: return mul(a, d(x));
        case Op::Ln: return div(d(x), x);
        case Op::Sqrt: return div(d(x), mul(number(2.0), a));
        default: return number(0.0);
        }
    }
};

} // namespace detail

inline Ast differentiate(const Ast& a, int k) {
    if (k < 1 || k > 4) throw std::invalid_argument("parameter index must be in 1..4");
    return detail::Differentiator(k).d(a);
}

// ---------------------------------------------------------------------------
// Multi-indices

inline constexpr int kMaxOrder = 5;

/// Number of multi-indices over 4 parameters with order <= `order`: C(order + 4, 4).
constexpr int multi_index_count(int order) {
    int n = 1;
    for (int i = 1; i <= 4; ++i) n = n * (order + i) / i;
    return n;
}

/// Canonical (sorted) list of 1-based parameter indices naming one mixed partial.
class MultiIndex {
public:
    MultiIndex() = default;

    MultiIndex(std::initializer_list<int> indices) : MultiIndex(std::span<const int>(indices.begin(), indices.size())) {}

    explicit MultiIndex(std::span<const int> indices) {
        if (indices.size() > kMaxOrder) throw OrderExceeded(static_cast<int>(indices.size()));
        for (int k : indices) {
            if (k < 1 || k > 4) throw std::invalid_argument("multi-index entry must be in 1..4");
            idx_[order_++] = static_cast<std::uint8_t>(k);
        }
        std::sort(idx_.begin(), idx_.begin() + order_);
    }

    int order() const { return order_; }
    int operator[](int i) const { return idx_[i]; }
    int last() const { return idx_[order_ - 1]; }

    MultiIndex with(int k) const {
        std::array<int, kMaxOrder + 1> tmp{};
        for (int i = 0; i < order_; ++i) tmp[i] = idx_[i];
        tmp[order_] = k;
        return MultiIndex(std::span<const int>(tmp.data(), order_ + 1));
    }

    MultiIndex without_last() const {
        MultiIndex m = *this;
        m.idx_[--m.order_] = 0;
        return m;
    }

    /// Dense position in graded order: (), (1), (2), (3), (4), (1,1), (1,2), ...
    int id() const { return table().id_of[encode()]; }

    static const MultiIndex& from_id(int id) { return table().all[id]; }

    bool operator==(const MultiIndex& o) const { return order_ == o.order_ && idx_ == o.idx_; }

private:
    std::array<std::uint8_t, kMaxOrder> idx_{};
    int order_ = 0;

    int encode() const {
        int code = 0;
        for (int i = order_ - 1; i >= 0; --i) code = code * 5 + idx_[i];
        return code;
    }

    struct Table {
        std::vector<MultiIndex> all;
        std::array<std::int16_t, 3125> id_of{};
    };

    static const Table& table() {
        static const Table t = [] {
            Table t;
            t.all.resize(multi_index_count(kMaxOrder));
            int next = 0;
            std::function<void(MultiIndex, int, int)> rec = [&](MultiIndex m, int from, int remaining) {
                if (remaining == 0) {
                    t.id_of[m.encode()] = static_cast<std::int16_t>(next);
                    t.all[next++] = m;
                    return;
                }
                for (int k = from; k <= 4; ++k) rec(m.with(k), k, remaining - 1);
            };
            for (int order = 0; order <= kMaxOrder; ++order) rec(MultiIndex{}, 1, order);
            return t;
        }();
        return t;
    }
};

// ---------------------------------------------------------------------------
// Compiled evaluation

/// Flat instruction list over a set of output trees with common subexpressions merged.
class Tape {
public:
    Tape() = default;

    explicit Tape(std::span<const Ast> outputs) {
        for (const Ast& a : outputs) outputs_.push_back(emit(a));
        by_node_.clear();
        by_key_.clear();
    }

    std::size_t instruction_count() const { return code_.size(); }
    std::size_t output_count() const { return outputs_.size(); }

    /// Writes one value per output. Throws DomainError.
    void evaluate(std::span<const double, 4> u, std::span<double> out) const {
        std::vector<double> reg(code_.size());
        for (std::size_t i = 0; i < code_.size(); ++i) {
            const Instr& ins = code_[i];
            switch (ins.op) {
            case Op::Number: reg[i] = ins.value; break;
            case Op::Param: reg[i] = u[ins.param - 1]; break;
            default:
                reg[i] = detail::apply_checked(ins.op, reg[ins.a], ins.b >= 0 ? reg[ins.b] : 0.0);
            }
        }
        for (std::size_t k = 0; k < outputs_.size() && k < out.size(); ++k) out[k] = reg[outputs_[k]];
    }

private:
    struct Instr {
        Op op;
        int a = -1;
        int b = -1;
        double value = 0.0;
        int param = 0;
    };

    struct Key {
        Op op;
        std::uint64_t bits;
        int a, b;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::size_t h = std::hash<std::uint64_t>{}(k.bits);
            h ^= (static_cast<std::size_t>(k.op) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
            h ^= (static_cast<std::size_t>(k.a) * 0x100000001b3ULL + (h << 6) + (h >> 2));
            h ^= (static_cast<std::size_t>(k.b) * 0xc6a4a7935bd1e995ULL + (h << 6) + (h >> 2));
            return h;
        }
    };

    std::vector<Instr> code_;
    std::vector<int> outputs_;
    std::unordered_map<const Node*, int> by_node_;
    std::unordered_map<Key, int, KeyHash> by_key_;

    int emit(const Ast& a) {
        if (auto it = by_node_.find(a.get()); it != by_node_.end()) return it->second;
        Instr ins{a->op};
        Key key{a->op, 0, -1, -1};
        if (a->op == Op::Number) {
            ins.value = a->value;
            key.bits = std::bit_cast<std::uint64_t>(a->value);
        } else if (a->op == Op::Param) {
            ins.param = a->param;
            key.bits = static_cast<std::uint64_t>(a->param);
        } else {
            ins.a = key.a = emit(a->lhs);
            if (a->rhs) ins.b = key.b = emit(a->rhs);
        }
        int slot;
        if (auto it = by_key_.find(key); it != by_key_.end()) {
            slot = it->second;
        } else {
            slot = static_cast<int>(code_.size());
            code_.push_back(ins);
            by_key_.emplace(key, slot);
        }
        by_node_.emplace(a.get(), slot);
        return slot;
    }
};

// ---------------------------------------------------------------------------
// Partial tables

/// Lazily built map from MultiIndex to the Ast of that mixed partial.
/// partial() mutates the memo; call build() before sharing across threads.
class PartialTable {
public:
    explicit PartialTable(Ast root) : entries_(multi_index_count(kMaxOrder)) { entries_[0] = std::move(root); }

    const Ast& root() const { return entries_[0]; }

    const Ast& partial(const MultiIndex& sigma) {
        Ast& slot = entries_[sigma.id()];
        if (!slot) slot = differentiate(partial(sigma.without_last()), sigma.last());
        return slot;
    }

    /// Index list in any order; canonicalized before lookup.
    const Ast& partial(std::initializer_list<int> sigma) {
        if (sigma.size() > kMaxOrder) throw OrderExceeded(static_cast<int>(sigma.size()));
        return partial(MultiIndex(sigma));
    }

    void build(int max_order) {
        if (max_order > kMaxOrder) throw OrderExceeded(max_order);
        for (int id = 0; id < multi_index_count(max_order); ++id) partial(MultiIndex::from_id(id));
    }

    /// Built entries in dense id order up to `max_order`. Requires build(max_order).
    std::vector<Ast> entries(int max_order) const {
        return {entries_.begin(), entries_.begin() + multi_index_count(max_order)};
    }

private:
    std::vector<Ast> entries_;
};

/// Values of every partial up to `max_order`, indexed by MultiIndex::id().
inline std::vector<double> evaluate_partials(PartialTable& table, std::span<const double, 4> u, int max_order) {
    table.build(max_order);
    std::vector<double> out;
    out.reserve(multi_index_count(max_order));
    for (const Ast& a : table.entries(max_order)) out.push_back(evaluate(a, u));
    return out;
}

} // namespace isect5::expr
