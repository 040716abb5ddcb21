#include <carnot/expression.hpp>

#include <carnot/errors.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace carnot {

namespace {

using Node = Expression::Node;
using Kind = Expression::Kind;
using NodePtr = std::shared_ptr<const Node>;

struct FunctionInfo {
    const char* name;
    int arity;
};

constexpr FunctionInfo kFunctions[] = {{"sin", 1}, {"cos", 1},  {"exp", 1}, {"log", 1}, {"abs", 1},
                                       {"sqrt", 1}, {"min", 2}, {"max", 2}, {"pow", 2}};

const FunctionInfo* find_function(const std::string& name) {
    for (const auto& f : kFunctions)
        if (name == f.name) return &f;
    return nullptr;
}

NodePtr make(Kind k, std::vector<NodePtr> args = {}, std::string name = {}) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->args = std::move(args);
    n->name = std::move(name);
    return n;
}

class Parser {
public:
    Parser(const std::string& text, int dim) : s_(text), dim_(dim) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) throw SyntaxError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
        return e;
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= s_.size()) throw SyntaxError(std::string("expected '") + c + "' before end of input", pos_);
            throw SyntaxError(std::string("expected '") + c + "'", pos_);
        }
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Kind::Add, {lhs, term()});
            else if (accept('-')) lhs = make(Kind::Sub, {lhs, term()});
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(Kind::Mul, {lhs, unary()});
            else if (accept('/')) lhs = make(Kind::Div, {lhs, unary()});
            else return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Kind::Neg, {unary()});
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make(Kind::Pow, {base, unary()});
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) throw SyntaxError("unexpected end of input", pos_);
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw SyntaxError("unexpected '" + std::string(1, c) + "'", pos_);
    }

    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t q = pos_ + 1;
            if (q < s_.size() && (s_[q] == '+' || s_[q] == '-')) ++q;
            if (q < s_.size() && std::isdigit(static_cast<unsigned char>(s_[q]))) {
                pos_ = q;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            }
        }
        double v = 0.0;
        const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != s_.data() + pos_) throw SyntaxError("malformed number", start);
        auto n = std::make_shared<Node>();
        n->kind = Kind::Number;
        n->number = v;
        return n;
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string name = s_.substr(start, pos_ - start);
        skip();
        if (pos_ < s_.size() && s_[pos_] == '(') {
            const FunctionInfo* f = find_function(name);
            if (!f) throw UnknownSymbol("unknown function '" + name + "'", start);
            ++pos_;
            std::vector<NodePtr> args{expr()};
            while (accept(',')) args.push_back(expr());
            expect(')');
            if (static_cast<int>(args.size()) != f->arity)
                throw SyntaxError(name + " takes " + std::to_string(f->arity) + " argument(s)", start);
            return make(Kind::Call, std::move(args), name);
        }
        if (name == "pi") {
            auto n = std::make_shared<Node>();
            n->kind = Kind::Number;
            n->number = std::numbers::pi;
            n->name = name;
            return n;
        }
        const int idx = variable_index(name);
        if (idx < 0) throw UnknownSymbol("unknown identifier '" + name + "'", start);
        auto n = std::make_shared<Node>();
        n->kind = Kind::Variable;
        n->variable = idx;
        n->name = name;
        return n;
    }

    int variable_index(const std::string& name) const {
        if (dim_ == 3) {
            if (name == "x") return 0;
            if (name == "y") return 1;
            if (name == "t") return 2;
        }
        if (name.size() >= 2 && name[0] == 'x' && name[1] != '0') {
            int k = 0;
            const auto res = std::from_chars(name.data() + 1, name.data() + name.size(), k);
            if (res.ec == std::errc() && res.ptr == name.data() + name.size() && k >= 1 && k <= dim_) return k - 1;
        }
        return -1;
    }

    const std::string& s_;
    int dim_;
    std::size_t pos_ = 0;
};

double value_of(double v) { return v; }
double value_of(const JetScalar& v) { return v.value(); }

template <class T>
T eval(const Node& n, const T* vars) {
    switch (n.kind) {
        case Kind::Number: return T(n.number);
        case Kind::Variable: return vars[n.variable];
        case Kind::Add: return eval(*n.args[0], vars) + eval(*n.args[1], vars);
        case Kind::Sub: return eval(*n.args[0], vars) - eval(*n.args[1], vars);
        case Kind::Mul: return eval(*n.args[0], vars) * eval(*n.args[1], vars);
        case Kind::Div: {
            const T den = eval(*n.args[1], vars);
            if (value_of(den) == 0.0) throw EvaluationError("division by zero");
            return eval(*n.args[0], vars) / den;
        }
        case Kind::Neg: return -eval(*n.args[0], vars);
        case Kind::Pow: {
            const T b = eval(*n.args[0], vars);
            const T e = eval(*n.args[1], vars);
            const double bv = value_of(b), ev = value_of(e);
            if (bv < 0.0 && ev != std::floor(ev)) throw EvaluationError("negative base with non-integer exponent");
            if (bv == 0.0 && ev < 0.0) throw EvaluationError("zero base with negative exponent");
            using std::pow;
            return pow(b, e);
        }
        case Kind::Call: {
            using std::abs, std::cos, std::exp, std::log, std::sin, std::sqrt;
            const T a = eval(*n.args[0], vars);
            const std::string& f = n.name;
            if (f == "sin") return sin(a);
            if (f == "cos") return cos(a);
            if (f == "exp") return exp(a);
            if (f == "abs") return abs(a);
            if (f == "log") {
                if (!(value_of(a) > 0.0)) throw EvaluationError("log of a non-positive value");
                return log(a);
            }
            if (f == "sqrt") {
                if (value_of(a) < 0.0) throw EvaluationError("sqrt of a negative value");
                return sqrt(a);
            }
            const T b = eval(*n.args[1], vars);
            if (f == "min") return value_of(a) <= value_of(b) ? a : b;
            if (f == "max") return value_of(a) >= value_of(b) ? a : b;
            if (f == "pow") {
                Node p;
                p.kind = Kind::Pow;
                p.args = n.args;
                return eval(p, vars);
            }
            throw EvaluationError("unknown function '" + f + "'");
        }
    }
    throw EvaluationError("corrupt expression node");
}

int precedence(const Node& n) {
    switch (n.kind) {
        case Kind::Add:
        case Kind::Sub: return 1;
        case Kind::Mul:
        case Kind::Div: return 2;
        case Kind::Neg: return 3;
        case Kind::Pow: return 4;
        default: return 5;
    }
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void print(const Node& n, std::string& out) {
    auto child = [&](const Node& c, bool parens) {
        if (parens) out += '(';
        print(c, out);
        if (parens) out += ')';
    };
    const int p = precedence(n);
    switch (n.kind) {
        case Kind::Number:
            out += n.name.empty() ? format_number(n.number) : n.name;
            return;
        case Kind::Variable: out += n.name; return;
        case Kind::Add:
        case Kind::Sub:
        case Kind::Mul:
        case Kind::Div: {
            static const char* ops[] = {" + ", " - ", "*", "/"};
            child(*n.args[0], precedence(*n.args[0]) < p);
            out += ops[static_cast<int>(n.kind) - static_cast<int>(Kind::Add)];
            child(*n.args[1], precedence(*n.args[1]) <= p);
            return;
        }
        case Kind::Pow:
            child(*n.args[0], precedence(*n.args[0]) <= p);
            out += '^';
            child(*n.args[1], precedence(*n.args[1]) < 3);
            return;
        case Kind::Neg:
            out += '-';
            child(*n.args[0], precedence(*n.args[0]) < p);
            return;
        case Kind::Call:
            out += n.name;
            out += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ", ";
                print(*n.args[i], out);
            }
            out += ')';
            return;
    }
}

}  // namespace

Expression parse_expression(const std::string& text, int dim) {
    if (dim < 1 || dim > kMaxDim) throw InvalidParameter("expression dimension out of range");
    return Expression(Parser(text, dim).parse(), dim);
}

double Expression::evaluate(const Point& x) const {
    if (x.size() != dim_) throw DimensionMismatch("expression evaluated at a point of the wrong dimension");
    const double v = eval<double>(*root_, x.data());
    if (!std::isfinite(v)) throw EvaluationError("expression is not finite at the point");
    return v;
}

JetScalar Expression::evaluate_jet(const Point& x) const {
    if (x.size() != dim_) throw DimensionMismatch("expression evaluated at a point of the wrong dimension");
    std::vector<JetScalar> vars;
    for (int k = 0; k < dim_; ++k) vars.push_back(JetScalar::variable(dim_, k, x[k]));
    JetScalar v = eval<JetScalar>(*root_, vars.data());
    if (!std::isfinite(v.value())) throw EvaluationError("expression is not finite at the point");
    return v;
}

std::string Expression::to_string() const {
    std::string out;
    print(*root_, out);
    return out;
}

ScalarField Expression::to_field(const std::string& name) const {
    ScalarField f;
    f.name = name.empty() ? to_string() : name;
    const Expression self = *this;
    f.value = [self](const Point& x) { return self.evaluate(x); };
    f.jet = [self](const Point& x) { return self.evaluate_jet(x).to_jet(self.dim()); };
    return f;
}

std::vector<std::string> boundary_preset_names() { return {"linear", "aronsson", "bumps", "cone"}; }

std::string boundary_preset(const std::string& name, const std::map<std::string, double>& params) {
    auto get = [&](const char* key, double fallback) {
        const auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    for (const auto& kv : params) {
        static const std::map<std::string, std::vector<std::string>> allowed = {
            {"linear", {"a", "b", "c"}}, {"aronsson", {"scale"}}, {"bumps", {"a", "b", "width"}}, {"cone", {"scale"}}};
        const auto it = allowed.find(name);
        if (it != allowed.end() && std::find(it->second.begin(), it->second.end(), kv.first) == it->second.end())
            throw InvalidParameter("preset '" + name + "' has no parameter '" + kv.first + "'");
    }
    const auto num = [](double v) { return v < 0 ? "(" + format_number(v) + ")" : format_number(v); };
    if (name == "linear") {
        std::string s = num(get("a", 1.0)) + "*x1 + " + num(get("b", 0.0)) + "*x2";
        const double c = get("c", 0.0);
        if (c != 0.0) s += " + " + num(c) + "*x3";
        return s;
    }
    if (name == "aronsson") {
        const double k = get("scale", 1.0);
        return num(k) + "*(pow(abs(x1), 4/3) - pow(abs(x2), 4/3))";
    }
    if (name == "bumps") {
        const std::string w = num(get("width", 8.0));
        return num(get("a", 1.0)) + "*exp(-" + w + "*((x1 - 0.5)^2 + x2^2 + x3^2)) + " + num(get("b", 0.5)) +
               "*exp(-" + w + "*((x1 + 0.5)^2 + x2^2 + x3^2))";
    }
    if (name == "cone") return num(get("scale", 1.0)) + "*sqrt(x1^2 + x2^2)";
    throw UnknownName("unknown boundary preset '" + name + "'");
}

}  // namespace carnot
