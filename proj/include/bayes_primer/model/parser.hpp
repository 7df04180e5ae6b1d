#ifndef BAYES_PRIMER_MODEL_PARSER_HPP_
#define BAYES_PRIMER_MODEL_PARSER_HPP_

#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bayes_primer/errors.hpp"
#include "bayes_primer/model/ast.hpp"

// Recursive-descent parser for the model language.  Comments run from
// '#' to end of line; statements are separated by newlines or ';'
// (newlines inside parentheses or brackets do not terminate a
// statement).  Errors carry line:column positions and name the expected
// token.

namespace bayes_primer::model {

class parse_error : public data_error {
 public:
  parse_error(const std::string& message, SourceSpan span)
      : data_error(span.to_string() + ": " + message), span_(span) {}

  SourceSpan span() const { return span_; }

 private:
  SourceSpan span_;
};

// Distributions the language accepts, with their arities.  dnorm is
// parameterized by (mean, sd) — not the BUGS precision convention.
inline const std::map<std::string, int>& distribution_arities() {
  static const std::map<std::string, int> table = {
      {"dbeta", 2}, {"dnorm", 2}, {"dbin", 2}, {"dgamma", 2}, {"dunif", 2}};
  return table;
}

namespace detail {

struct Token {
  enum class Kind {
    identifier,
    number,
    tilde,
    arrow,       // <-
    lparen,
    rparen,
    lbrace,
    rbrace,
    lbracket,
    rbracket,
    comma,
    colon,
    plus,
    minus,
    star,
    slash,
    separator,   // newline or ';'
    end
  };
  Kind kind;
  std::string text;
  double number = 0.0;
  SourceSpan span;
};

inline const char* token_name(Token::Kind kind) {
  switch (kind) {
    case Token::Kind::identifier: return "identifier";
    case Token::Kind::number: return "number";
    case Token::Kind::tilde: return "'~'";
    case Token::Kind::arrow: return "'<-'";
    case Token::Kind::lparen: return "'('";
    case Token::Kind::rparen: return "')'";
    case Token::Kind::lbrace: return "'{'";
    case Token::Kind::rbrace: return "'}'";
    case Token::Kind::lbracket: return "'['";
    case Token::Kind::rbracket: return "']'";
    case Token::Kind::comma: return "','";
    case Token::Kind::colon: return "':'";
    case Token::Kind::plus: return "'+'";
    case Token::Kind::minus: return "'-'";
    case Token::Kind::star: return "'*'";
    case Token::Kind::slash: return "'/'";
    case Token::Kind::separator: return "statement separator";
    case Token::Kind::end: return "end of input";
  }
  return "token";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    int depth = 0;  // newlines are soft inside () and []
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      if (c == '\n') {
        if (depth == 0) push(tokens, Token::Kind::separator, "\n");
        advance();
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
        continue;
      }
      if (c == ';') {
        push(tokens, Token::Kind::separator, ";");
        advance();
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && pos_ + 1 < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        lex_number(tokens);
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
          c == '.') {
        lex_identifier(tokens);
        continue;
      }
      const SourceSpan span = here();
      switch (c) {
        case '~': push(tokens, Token::Kind::tilde, "~"); advance(); break;
        case '(': push(tokens, Token::Kind::lparen, "("); ++depth; advance(); break;
        case ')': push(tokens, Token::Kind::rparen, ")"); if (depth > 0) --depth; advance(); break;
        case '{': push(tokens, Token::Kind::lbrace, "{"); advance(); break;
        case '}': push(tokens, Token::Kind::rbrace, "}"); advance(); break;
        case '[': push(tokens, Token::Kind::lbracket, "["); ++depth; advance(); break;
        case ']': push(tokens, Token::Kind::rbracket, "]"); if (depth > 0) --depth; advance(); break;
        case ',': push(tokens, Token::Kind::comma, ","); advance(); break;
        case ':': push(tokens, Token::Kind::colon, ":"); advance(); break;
        case '+': push(tokens, Token::Kind::plus, "+"); advance(); break;
        case '*': push(tokens, Token::Kind::star, "*"); advance(); break;
        case '/': push(tokens, Token::Kind::slash, "/"); advance(); break;
        case '-': advance(); break;  // handled below
        case '<':
          advance();
          if (pos_ < src_.size() && src_[pos_] == '-') {
            advance();
            tokens.push_back({Token::Kind::arrow, "<-", 0.0, span});
          } else {
            throw parse_error("unexpected '<' (did you mean '<-'?)", span);
          }
          break;
        default:
          throw parse_error(std::string("unexpected character '") + c + "'",
                            span);
      }
      if (c == '-') tokens.push_back({Token::Kind::minus, "-", 0.0, span});
    }
    push(tokens, Token::Kind::end, "");
    return tokens;
  }

 private:
  SourceSpan here() const { return {line_, col_}; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void push(std::vector<Token>& tokens, Token::Kind kind, std::string text) {
    tokens.push_back({kind, std::move(text), 0.0, here()});
  }

  void lex_identifier(std::vector<Token>& tokens) {
    const SourceSpan span = here();
    std::string name;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
          c == '.') {
        name += c;
        advance();
      } else {
        break;
      }
    }
    tokens.push_back({Token::Kind::identifier, std::move(name), 0.0, span});
  }

  void lex_number(std::vector<Token>& tokens) {
    const SourceSpan span = here();
    std::string text;
    bool seen_dot = false;
    bool seen_exp = false;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        text += c;
        advance();
      } else if (c == '.' && !seen_dot && !seen_exp) {
        seen_dot = true;
        text += c;
        advance();
      } else if ((c == 'e' || c == 'E') && !seen_exp && !text.empty()) {
        seen_exp = true;
        text += c;
        advance();
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
          text += src_[pos_];
          advance();
        }
      } else {
        break;
      }
    }
    Token tok{Token::Kind::number, text, 0.0, span};
    try {
      tok.number = std::stod(text);
    } catch (const std::exception&) {
      throw parse_error("malformed numeric literal '" + text + "'", span);
    }
    tokens.push_back(std::move(tok));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  ModelAst run() {
    skip_separators();
    expect_keyword("model");
    expect(Token::Kind::lbrace);
    ast_.statements = parse_statements();
    expect(Token::Kind::rbrace);
    skip_separators();
    if (peek().kind != Token::Kind::end) {
      throw parse_error(std::string("unexpected ") + token_name(peek().kind) +
                            " after the closing '}'",
                        peek().span);
    }
    return std::move(ast_);
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }

  const Token& take() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

  void skip_separators() {
    while (peek().kind == Token::Kind::separator) take();
  }

  const Token& expect(Token::Kind kind) {
    if (peek().kind != kind) {
      throw parse_error(std::string("expected ") + token_name(kind) +
                            ", found " + token_name(peek().kind),
                        peek().span);
    }
    return take();
  }

  void expect_keyword(const std::string& word) {
    if (peek().kind != Token::Kind::identifier || peek().text != word) {
      throw parse_error("expected '" + word + "', found " +
                            token_name(peek().kind),
                        peek().span);
    }
    take();
  }

  // Separators (newlines or ';') end a statement but are optional where
  // the next token can only start a fresh statement.
  std::vector<Statement> parse_statements() {
    std::vector<Statement> out;
    skip_separators();
    while (peek().kind != Token::Kind::rbrace &&
           peek().kind != Token::Kind::end) {
      out.push_back(parse_statement());
      skip_separators();
    }
    return out;
  }

  Statement parse_statement() {
    if (peek().kind == Token::Kind::identifier && peek().text == "for") {
      return parse_loop();
    }
    if (peek().kind != Token::Kind::identifier) {
      throw parse_error(std::string("expected a statement, found ") +
                            token_name(peek().kind),
                        peek().span);
    }
    Statement s;
    const Token& name = take();
    s.span = name.span;
    s.target = name.text;
    if (peek().kind == Token::Kind::lbracket) {
      take();
      s.target_index = parse_expr();
      expect(Token::Kind::rbracket);
    }
    if (peek().kind == Token::Kind::tilde) {
      take();
      s.kind = Statement::Kind::stochastic;
      parse_distribution_call(s);
    } else if (peek().kind == Token::Kind::arrow) {
      take();
      s.kind = Statement::Kind::deterministic;
      s.expr = parse_expr();
    } else {
      throw parse_error(std::string("expected '~' or '<-', found ") +
                            token_name(peek().kind),
                        peek().span);
    }
    return s;
  }

  void parse_distribution_call(Statement& s) {
    const Token& name = expect(Token::Kind::identifier);
    const auto& arities = distribution_arities();
    const auto it = arities.find(name.text);
    if (it == arities.end()) {
      throw parse_error("unknown distribution '" + name.text + "'", name.span);
    }
    s.dist = name.text;
    expect(Token::Kind::lparen);
    if (peek().kind != Token::Kind::rparen) {
      s.args.push_back(parse_expr());
      while (peek().kind == Token::Kind::comma) {
        take();
        s.args.push_back(parse_expr());
      }
    }
    expect(Token::Kind::rparen);
    if (static_cast<int>(s.args.size()) != it->second) {
      throw parse_error(s.dist + " takes " + std::to_string(it->second) +
                            " arguments, found " + std::to_string(s.args.size()),
                        name.span);
    }
  }

  Statement parse_loop() {
    Statement s;
    s.kind = Statement::Kind::loop;
    s.span = peek().span;
    take();  // for
    expect(Token::Kind::lparen);
    const Token& var = expect(Token::Kind::identifier);
    s.loop_var = var.text;
    expect_keyword("in");
    s.lower = parse_bound();
    expect(Token::Kind::colon);
    s.upper = parse_bound();
    expect(Token::Kind::rparen);
    expect(Token::Kind::lbrace);
    s.body = parse_statements();
    expect(Token::Kind::rbrace);
    return s;
  }

  LoopBound parse_bound() {
    LoopBound b;
    b.span = peek().span;
    if (peek().kind == Token::Kind::number) {
      const Token& t = take();
      if (t.number != static_cast<double>(static_cast<long>(t.number)) ||
          t.number < 1.0) {
        throw parse_error("loop bounds must be positive integers", t.span);
      }
      b.is_literal = true;
      b.literal = static_cast<long>(t.number);
    } else if (peek().kind == Token::Kind::identifier) {
      const Token& t = take();
      b.is_literal = false;
      b.name = t.text;
    } else {
      throw parse_error(std::string("expected a loop bound (integer literal or "
                                    "data-bound constant), found ") +
                            token_name(peek().kind),
                        peek().span);
    }
    return b;
  }

  int parse_expr() {
    int lhs = parse_term();
    while (peek().kind == Token::Kind::plus ||
           peek().kind == Token::Kind::minus) {
      const Token& op = take();
      const int rhs = parse_term();
      lhs = make_binary(op.kind == Token::Kind::plus ? '+' : '-', lhs, rhs,
                        op.span);
    }
    return lhs;
  }

  int parse_term() {
    int lhs = parse_unary();
    while (peek().kind == Token::Kind::star ||
           peek().kind == Token::Kind::slash) {
      const Token& op = take();
      const int rhs = parse_unary();
      lhs = make_binary(op.kind == Token::Kind::star ? '*' : '/', lhs, rhs,
                        op.span);
    }
    return lhs;
  }

  int parse_unary() {
    if (peek().kind == Token::Kind::minus) {
      const Token& op = take();
      ExprNode node;
      node.kind = ExprNode::Kind::negate;
      node.span = op.span;
      node.lhs = parse_unary();
      return add(node);
    }
    return parse_primary();
  }

  int parse_primary() {
    const Token& t = peek();
    if (t.kind == Token::Kind::number) {
      take();
      ExprNode node;
      node.kind = ExprNode::Kind::number;
      node.span = t.span;
      node.number = t.number;
      return add(node);
    }
    if (t.kind == Token::Kind::identifier) {
      take();
      ExprNode node;
      node.kind = ExprNode::Kind::variable;
      node.span = t.span;
      node.name = t.text;
      if (peek().kind == Token::Kind::lbracket) {
        take();
        node.index = parse_expr();
        expect(Token::Kind::rbracket);
      }
      return add(node);
    }
    if (t.kind == Token::Kind::lparen) {
      take();
      const int inner = parse_expr();
      expect(Token::Kind::rparen);
      return inner;
    }
    throw parse_error(std::string("expected an expression, found ") +
                          token_name(t.kind),
                      t.span);
  }

  int make_binary(char op, int lhs, int rhs, SourceSpan span) {
    ExprNode node;
    node.kind = ExprNode::Kind::binary;
    node.span = span;
    node.op = op;
    node.lhs = lhs;
    node.rhs = rhs;
    return add(node);
  }

  int add(ExprNode node) {
    ast_.pool.push_back(std::move(node));
    return static_cast<int>(ast_.pool.size()) - 1;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  ModelAst ast_;
};

}  // namespace detail

// Script size guard matches the documented 1 MB limit.
inline ModelAst parse(std::string_view source) {
  if (source.size() > (1u << 20)) {
    throw data_error("model script exceeds the 1 MB limit");
  }
  detail::Lexer lexer(source);
  detail::Parser parser(lexer.run());
  return parser.run();
}

}  // namespace bayes_primer::model

#endif  // BAYES_PRIMER_MODEL_PARSER_HPP_
