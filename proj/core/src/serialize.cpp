#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/errors.hpp"

#include <cctype>
#include <charconv>
#include <string>
#include <vector>

namespace cocy {

namespace {

// rule := constant m.. | identity | diag a.. | piecewise N m.. | rotation theta0 k
//       | product (rule) (rule).. | scaled s (rule)
class RuleParser {
public:
    RuleParser(const std::string& text, int d) : d_(d) {
        std::string cur;
        for (char c : text) {
            if (c == '(' || c == ')') {
                flush(cur);
                toks_.emplace_back(1, c);
            } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
                flush(cur);
            } else {
                cur += c;
            }
        }
        flush(cur);
    }

    RulePtr parse_all() {
        RulePtr r = rule();
        if (i_ != toks_.size()) fail("trailing input '" + toks_[i_] + "'");
        return r;
    }

private:
    void flush(std::string& cur) {
        if (!cur.empty()) toks_.push_back(cur);
        cur.clear();
    }
    [[noreturn]] void fail(const std::string& why) const { throw ConfigError("rule: " + why); }

    const std::string& next() {
        if (i_ >= toks_.size()) fail("unexpected end of rule");
        return toks_[i_++];
    }
    bool peek(const char* s) const { return i_ < toks_.size() && toks_[i_] == s; }

    double number() {
        const std::string& t = next();
        double v = 0.0;
        const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || p != t.data() + t.size()) fail("expected a number, got '" + t + "'");
        return v;
    }

    Mat matrix() {
        Mat m(d_, d_);
        for (int r = 0; r < d_; ++r)
            for (int c = 0; c < d_; ++c) m(r, c) = number();
        return m;
    }

    RulePtr rule() {
        const std::string head = next();
        if (head == "(") {
            RulePtr r = rule();
            if (next() != ")") fail("missing ')'");
            return r;
        }
        if (head == "constant") return constant_rule(matrix());
        if (head == "identity") return constant_rule(Mat::Identity(d_, d_));
        if (head == "diag") {
            Vec v(d_);
            for (int k = 0; k < d_; ++k) v(k) = number();
            return constant_rule(v.asDiagonal());
        }
        if (head == "piecewise") {
            const double n = number();
            if (n < 1 || n != static_cast<int>(n) || n > 4096) fail("piecewise needs a cell count in 1..4096");
            std::vector<Mat> cells;
            for (int k = 0; k < static_cast<int>(n); ++k) cells.push_back(matrix());
            return piecewise_rule(cells);
        }
        if (head == "rotation") {
            const double t0 = number();
            const double k = number();
            return rotation_field(d_, t0, k);
        }
        if (head == "product") {
            std::vector<RulePtr> f;
            while (peek("(")) f.push_back(rule());
            if (f.empty()) fail("product needs parenthesized factors");
            return product_rule(f);
        }
        if (head == "scaled") {
            const double s = number();
            if (!peek("(")) fail("scaled needs a parenthesized rule");
            return scaled_rule(rule(), s);
        }
        fail("unknown rule '" + head + "'");
    }

    int d_;
    std::vector<std::string> toks_;
    std::size_t i_ = 0;
};

}  // namespace

RulePtr parse_rule(const std::string& text, int d) {
    if (d < 1 || d > 6) throw ConfigError("rule: dimension must be in 1..6");
    return RuleParser(text, d).parse_all();
}

}  // namespace cocy
