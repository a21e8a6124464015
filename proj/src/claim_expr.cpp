#include "bsdelab/claim_expr.hpp"

#include <cctype>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bsdelab {

namespace {

struct Node {
    enum class Kind { Constant, Price, Add, Sub, Mul, Div, Neg, Max, Min };

    Kind kind;
    double value = 0.0;       // Constant
    std::size_t index = 0;    // Price
    std::vector<Node> args;   // operator children

    double eval(std::span<const double> prices) const {
        switch (kind) {
            case Kind::Constant:
                return value;
            case Kind::Price:
                return prices[index];
            case Kind::Add:
                return args[0].eval(prices) + args[1].eval(prices);
            case Kind::Sub:
                return args[0].eval(prices) - args[1].eval(prices);
            case Kind::Mul:
                return args[0].eval(prices) * args[1].eval(prices);
            case Kind::Div:
                return args[0].eval(prices) / args[1].eval(prices);
            case Kind::Neg:
                return -args[0].eval(prices);
            case Kind::Max: {
                double best = args[0].eval(prices);
                for (std::size_t i = 1; i < args.size(); ++i) {
                    best = std::max(best, args[i].eval(prices));
                }
                return best;
            }
            case Kind::Min: {
                double best = args[0].eval(prices);
                for (std::size_t i = 1; i < args.size(); ++i) {
                    best = std::min(best, args[i].eval(prices));
                }
                return best;
            }
        }
        return 0.0;  // unreachable
    }
};

class Parser {
public:
    Parser(const std::string& text, std::size_t n_assets)
        : text_(text), n_assets_(n_assets) {}

    Node parse() {
        Node root = expression();
        skip_spaces();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("claim expression: " + what + " at position " +
                                    std::to_string(pos_));
    }

    void skip_spaces() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool consume(char c) {
        skip_spaces();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_spaces();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Node expression() {
        Node left = term();
        while (true) {
            if (consume('+')) {
                left = binary(Node::Kind::Add, std::move(left), term());
            } else if (consume('-')) {
                left = binary(Node::Kind::Sub, std::move(left), term());
            } else {
                return left;
            }
        }
    }

    Node term() {
        Node left = unary();
        while (true) {
            if (consume('*')) {
                left = binary(Node::Kind::Mul, std::move(left), unary());
            } else if (consume('/')) {
                left = binary(Node::Kind::Div, std::move(left), unary());
            } else {
                return left;
            }
        }
    }

    Node unary() {
        if (consume('-')) {
            Node node{Node::Kind::Neg};
            node.args.push_back(unary());
            return node;
        }
        return primary();
    }

    Node primary() {
        char c = peek();
        if (c == '(') {
            ++pos_;
            Node inner = expression();
            if (!consume(')')) fail("expected ')'");
            return inner;
        }
        if (c == 'P') {
            return price_ref();
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return number();
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            return function_call();
        }
        fail(c == '\0' ? "unexpected end of input" : "unexpected character");
    }

    Node price_ref() {
        ++pos_;  // past 'P'
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            fail("'P' must be followed by an asset index");
        }
        std::size_t index = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            index = index * 10 + static_cast<std::size_t>(text_[pos_] - '0');
            if (index > 1000000) fail("asset index out of range");
            ++pos_;
        }
        if (index > n_assets_) {
            fail("asset index P" + std::to_string(index) + " exceeds the " +
                 std::to_string(n_assets_) + " risky assets");
        }
        Node node{Node::Kind::Price};
        node.index = index;
        return node;
    }

    Node number() {
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        double value = std::strtod(begin, &end);
        if (end == begin) fail("expected a number");
        pos_ += static_cast<std::size_t>(end - begin);
        Node node{Node::Kind::Constant};
        node.value = value;
        return node;
    }

    Node function_call() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        std::string name = text_.substr(start, pos_ - start);
        Node::Kind kind;
        if (name == "max") {
            kind = Node::Kind::Max;
        } else if (name == "min") {
            kind = Node::Kind::Min;
        } else {
            pos_ = start;
            fail("unknown function '" + name + "'");
        }
        if (!consume('(')) fail("expected '(' after '" + name + "'");
        Node node{kind};
        node.args.push_back(expression());
        while (consume(',')) node.args.push_back(expression());
        if (!consume(')')) fail("expected ')' in '" + name + "' call");
        if (node.args.size() < 2) {
            fail("'" + name + "' needs at least two arguments");
        }
        return node;
    }

    Node binary(Node::Kind kind, Node left, Node right) {
        Node node{kind};
        node.args.push_back(std::move(left));
        node.args.push_back(std::move(right));
        return node;
    }

    const std::string& text_;
    std::size_t n_assets_;
    std::size_t pos_ = 0;
};

}  // namespace

ClaimSpec parse_claim(const std::string& text, std::size_t n_assets) {
    auto root = std::make_shared<Node>(Parser(text, n_assets).parse());
    ClaimSpec claim;
    claim.label = text;
    claim.payoff = [root](std::span<const double> prices) { return root->eval(prices); };
    return claim;
}

}  // namespace bsdelab
