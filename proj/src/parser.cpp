#include "sparqlopt/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace sparqlopt {

ParseError::ParseError(std::string message, int line, int column, std::string token)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message +
                         (token.empty() ? "" : " (at '" + token + "')")),
      line_(line),
      column_(column),
      token_(std::move(token)) {}

namespace {

enum class Tok {
    Eof,
    IriRef,      // <...>
    PName,       // prefix:local or prefix: or :local
    Variable,    // ?x or $x
    BlankLabel,  // _:label
    String,      // "..." (value with escapes resolved)
    Integer,
    Decimal,
    Double,
    Keyword,     // bare identifier (SELECT, a, bound, ...)
    Placeholder,  // [NAME]
    LangTag,     // @en
    DtSep,       // ^^
    LBrace, RBrace, LParen, RParen,
    Dot, Semicolon, Comma, Slash, Star,
    Eq, Ne, Lt, Gt, Le, Ge,
    OrOr, AndAnd, Bang,
    LBracket, RBracket,
};

struct Token {
    Tok type = Tok::Eof;
    std::string text;  // decoded value for String/IriRef, raw otherwise
    int line = 1;
    int column = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& input) : input_(input) {}

    Token next() {
        skip_ws();
        Token t;
        t.line = line_;
        t.column = column_;
        if (pos_ >= input_.size()) return t;
        char c = input_[pos_];
        switch (c) {
            case '{': advance(); t.type = Tok::LBrace; t.text = "{"; return t;
            case '}': advance(); t.type = Tok::RBrace; t.text = "}"; return t;
            case '(': advance(); t.type = Tok::LParen; t.text = "("; return t;
            case ')': advance(); t.type = Tok::RParen; t.text = ")"; return t;
            case '.': advance(); t.type = Tok::Dot; t.text = "."; return t;
            case ';': advance(); t.type = Tok::Semicolon; t.text = ";"; return t;
            case ',': advance(); t.type = Tok::Comma; t.text = ","; return t;
            case '/': advance(); t.type = Tok::Slash; t.text = "/"; return t;
            case '*': advance(); t.type = Tok::Star; t.text = "*"; return t;
            case '=': advance(); t.type = Tok::Eq; t.text = "="; return t;
            case ']': advance(); t.type = Tok::RBracket; t.text = "]"; return t;
            default: break;
        }
        if (c == '<') return lex_iri(t);
        if (c == '?' || c == '$') return lex_variable(t);
        if (c == '"' || c == '\'') return lex_string(t, c);
        if (c == '_' && peek(1) == ':') return lex_blank(t);
        if (c == '@') return lex_langtag(t);
        if (c == '^' && peek(1) == '^') { advance(); advance(); t.type = Tok::DtSep; t.text = "^^"; return t; }
        if (c == '|' && peek(1) == '|') { advance(); advance(); t.type = Tok::OrOr; t.text = "||"; return t; }
        if (c == '&' && peek(1) == '&') { advance(); advance(); t.type = Tok::AndAnd; t.text = "&&"; return t; }
        if (c == '!' && peek(1) == '=') { advance(); advance(); t.type = Tok::Ne; t.text = "!="; return t; }
        if (c == '!') { advance(); t.type = Tok::Bang; t.text = "!"; return t; }
        if (c == '<') { advance(); t.type = Tok::Lt; t.text = "<"; return t; }
        if (c == '>' && peek(1) == '=') { advance(); advance(); t.type = Tok::Ge; t.text = ">="; return t; }
        if (c == '>') { advance(); t.type = Tok::Gt; t.text = ">"; return t; }
        if (c == '[') return lex_bracket(t);
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            ((c == '+' || c == '-') && std::isdigit(static_cast<unsigned char>(peek(1)))))
            return lex_number(t);
        if (is_name_start(c)) return lex_name(t);
        throw ParseError("unexpected character", line_, column_, std::string(1, c));
    }

private:
    const std::string& input_;
    size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;

    char peek(size_t off = 0) const {
        return pos_ + off < input_.size() ? input_[pos_ + off] : '\0';
    }

    void advance() {
        if (pos_ < input_.size()) {
            if (input_[pos_] == '\n') { ++line_; column_ = 1; } else { ++column_; }
            ++pos_;
        }
    }

    void skip_ws() {
        while (pos_ < input_.size()) {
            char c = input_[pos_];
            if (c == '#') {
                while (pos_ < input_.size() && input_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    static bool is_name_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':';
    }

    static bool is_name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    }

    Token lex_iri(Token t) {
        // '<' starts an IRIREF only if it closes without whitespace; otherwise
        // it is the less-than operator.
        size_t scan = pos_ + 1;
        while (scan < input_.size() && input_[scan] != '>' && input_[scan] != '\n' &&
               input_[scan] != ' ' && input_[scan] != '"' && input_[scan] != '{')
            ++scan;
        if (scan >= input_.size() || input_[scan] != '>') {
            advance();
            if (peek() == '=') { advance(); t.type = Tok::Le; t.text = "<="; return t; }
            t.type = Tok::Lt;
            t.text = "<";
            return t;
        }
        advance();  // <
        std::string value;
        while (pos_ < input_.size() && input_[pos_] != '>') {
            value.push_back(input_[pos_]);
            advance();
        }
        if (pos_ >= input_.size()) throw ParseError("unterminated IRI", t.line, t.column);
        advance();  // >
        t.type = Tok::IriRef;
        t.text = value;
        return t;
    }

    Token lex_variable(Token t) {
        advance();  // ? or $
        std::string name;
        while (pos_ < input_.size() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                                        peek() == '_'))
        {
            name.push_back(peek());
            advance();
        }
        if (name.empty()) throw ParseError("empty variable name", t.line, t.column);
        t.type = Tok::Variable;
        t.text = name;
        return t;
    }

    Token lex_string(Token t, char quote) {
        advance();
        std::string value;
        while (pos_ < input_.size() && peek() != quote) {
            char c = peek();
            if (c == '\\') {
                advance();
                char e = peek();
                switch (e) {
                    case 'n': value.push_back('\n'); break;
                    case 't': value.push_back('\t'); break;
                    case 'r': value.push_back('\r'); break;
                    case '\\': value.push_back('\\'); break;
                    case '"': value.push_back('"'); break;
                    case '\'': value.push_back('\''); break;
                    default: value.push_back(e); break;
                }
                advance();
            } else {
                value.push_back(c);
                advance();
            }
        }
        if (pos_ >= input_.size()) throw ParseError("unterminated string", t.line, t.column);
        advance();
        t.type = Tok::String;
        t.text = value;
        return t;
    }

    Token lex_blank(Token t) {
        advance();  // _
        advance();  // :
        std::string label;
        while (pos_ < input_.size() && is_name_char(peek())) {
            label.push_back(peek());
            advance();
        }
        if (label.empty()) throw ParseError("empty blank node label", t.line, t.column);
        t.type = Tok::BlankLabel;
        t.text = label;
        return t;
    }

    Token lex_langtag(Token t) {
        advance();  // @
        std::string tag;
        while (pos_ < input_.size() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-')) {
            tag.push_back(peek());
            advance();
        }
        if (tag.empty()) throw ParseError("empty language tag", t.line, t.column);
        t.type = Tok::LangTag;
        t.text = tag;
        return t;
    }

    Token lex_bracket(Token t) {
        // [NAME] placeholders are recognized so the parser can diagnose an
        // uninstantiated template; a bare '[' is rejected (anon blanks are
        // outside the fragment).
        size_t scan = pos_ + 1;
        std::string name;
        while (scan < input_.size() &&
               (std::isupper(static_cast<unsigned char>(input_[scan])) ||
                std::isdigit(static_cast<unsigned char>(input_[scan])) || input_[scan] == '_')) {
            name.push_back(input_[scan]);
            ++scan;
        }
        if (!name.empty() && scan < input_.size() && input_[scan] == ']') {
            while (pos_ <= scan) advance();
            t.type = Tok::Placeholder;
            t.text = name;
            return t;
        }
        advance();
        t.type = Tok::LBracket;
        t.text = "[";
        return t;
    }

    Token lex_number(Token t) {
        std::string text;
        if (peek() == '+' || peek() == '-') { text.push_back(peek()); advance(); }
        bool dot = false, exp = false;
        while (pos_ < input_.size()) {
            char c = peek();
            if (std::isdigit(static_cast<unsigned char>(c))) {
                text.push_back(c);
                advance();
            } else if (c == '.' && !dot && !exp &&
                       std::isdigit(static_cast<unsigned char>(peek(1)))) {
                dot = true;
                text.push_back(c);
                advance();
            } else if ((c == 'e' || c == 'E') && !exp) {
                exp = true;
                text.push_back(c);
                advance();
                if (peek() == '+' || peek() == '-') { text.push_back(peek()); advance(); }
            } else {
                break;
            }
        }
        t.type = exp ? Tok::Double : (dot ? Tok::Decimal : Tok::Integer);
        t.text = text;
        return t;
    }

    Token lex_name(Token t) {
        // Bare identifier, possibly a prefixed name (with ':').
        std::string text;
        bool has_colon = false;
        while (pos_ < input_.size()) {
            char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
                text.push_back(c);
                advance();
            } else if (c == ':' && !has_colon) {
                has_colon = true;
                text.push_back(c);
                advance();
                while (pos_ < input_.size() && is_name_char(peek())) {
                    // a trailing '.' is a statement terminator, not a name char
                    if (peek() == '.' && !is_name_char(this->peek(1))) break;
                    text.push_back(peek());
                    advance();
                }
                break;
            } else {
                break;
            }
        }
        t.type = has_colon ? Tok::PName : Tok::Keyword;
        t.text = text;
        return t;
    }
};

bool keyword_is(const Token& t, const char* kw) {
    if (t.type != Tok::Keyword) return false;
    if (t.text.size() != std::strlen(kw)) return false;
    for (size_t i = 0; i < t.text.size(); ++i)
        if (std::toupper(static_cast<unsigned char>(t.text[i])) != kw[i]) return false;
    return true;
}

class Parser {
public:
    Parser(const std::string& text, std::string base) : lexer_(text), base_(std::move(base)) {
        shift();
    }

    Query parse() {
        parse_prologue();
        Query q = parse_query_body(true);
        expect_eof();
        q.prefixes = prefixes_;
        validate(q);
        return q;
    }

private:
    Lexer lexer_;
    Token cur_;
    std::string base_;
    std::map<std::string, std::string> prefixes_;
    std::map<std::string, std::string> blank_renames_;
    int blank_counter_ = 0;

    void shift() { cur_ = lexer_.next(); }

    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError(msg, cur_.line, cur_.column, cur_.text);
    }

    bool at_keyword(const char* kw) const { return keyword_is(cur_, kw); }

    void expect_keyword(const char* kw) {
        if (!at_keyword(kw)) fail(std::string("expected ") + kw);
        shift();
    }

    void expect(Tok t, const char* what) {
        if (cur_.type != t) fail(std::string("expected ") + what);
        shift();
    }

    void expect_eof() {
        if (cur_.type != Tok::Eof) fail("trailing content after query");
    }

    std::string expand_pname(const Token& t) {
        size_t colon = t.text.find(':');
        std::string prefix = t.text.substr(0, colon);
        std::string local = t.text.substr(colon + 1);
        auto it = prefixes_.find(prefix);
        if (it == prefixes_.end())
            throw ParseError("unknown prefix '" + prefix + ":'", t.line, t.column, t.text);
        return it->second + local;
    }

    std::string resolve_iri(const std::string& iri, const Token& t) {
        if (is_absolute_iri(iri)) return iri;
        if (base_.empty())
            throw ParseError("relative IRI without a base", t.line, t.column, iri);
        return base_ + iri;
    }

    void parse_prologue() {
        for (;;) {
            if (at_keyword("PREFIX")) {
                shift();
                if (cur_.type != Tok::PName && cur_.type != Tok::Keyword)
                    fail("expected prefix name");
                std::string name = cur_.text;
                if (!name.empty() && name.back() == ':') name.pop_back();
                if (cur_.type == Tok::PName && cur_.text.find(':') != cur_.text.size() - 1)
                    fail("expected prefix name ending in ':'");
                if (cur_.type == Tok::Keyword) {
                    fail("expected prefix name ending in ':'");
                }
                shift();
                if (cur_.type != Tok::IriRef) fail("expected IRI after PREFIX");
                prefixes_[name] = resolve_iri(cur_.text, cur_);
                shift();
            } else if (at_keyword("BASE")) {
                shift();
                if (cur_.type != Tok::IriRef) fail("expected IRI after BASE");
                base_ = cur_.text;
                shift();
            } else {
                break;
            }
        }
    }

    Query parse_query_body(bool /*top*/) {
        if (at_keyword("SELECT")) return parse_select();
        if (at_keyword("ASK")) return parse_ask();
        if (at_keyword("CONSTRUCT")) return parse_construct();
        fail("expected SELECT, ASK or CONSTRUCT");
    }

    Query parse_select() {
        Query q;
        q.form = QueryForm::Select;
        expect_keyword("SELECT");
        if (at_keyword("DISTINCT")) {
            q.distinct = true;
            shift();
        }
        if (cur_.type == Tok::Star) {
            q.select_all = true;
            shift();
        } else {
            while (cur_.type == Tok::Variable || cur_.type == Tok::LParen)
                q.projection.push_back(parse_projection_item());
            if (q.projection.empty()) fail("expected projection");
        }
        if (at_keyword("WHERE")) shift();
        q.pattern = parse_group();
        parse_solution_modifiers(q);
        return q;
    }

    ProjectionItem parse_projection_item() {
        if (cur_.type == Tok::Variable) {
            ProjectionItem item = ProjectionItem::plain(RDFTerm::variable(cur_.text));
            shift();
            return item;
        }
        expect(Tok::LParen, "'('");
        ProjectionItem item;
        item.aggregate = parse_aggregate_fn();
        expect(Tok::LParen, "'('");
        if (at_keyword("DISTINCT")) {
            item.distinct = true;
            shift();
        }
        if (cur_.type == Tok::Star) {
            item.star = true;
            shift();
        } else if (cur_.type == Tok::Variable) {
            item.argument = RDFTerm::variable(cur_.text);
            shift();
        } else {
            fail("expected aggregate argument");
        }
        if (cur_.type == Tok::Semicolon) {
            shift();
            expect_keyword("SEPARATOR");
            expect(Tok::Eq, "'='");
            if (cur_.type != Tok::String) fail("expected separator string");
            item.separator = cur_.text;
            shift();
        }
        expect(Tok::RParen, "')'");
        expect_keyword("AS");
        if (cur_.type != Tok::Variable) fail("expected variable after AS");
        item.var = RDFTerm::variable(cur_.text);
        shift();
        expect(Tok::RParen, "')'");
        return item;
    }

    AggregateFn parse_aggregate_fn() {
        static const std::pair<const char*, AggregateFn> fns[] = {
            {"COUNT", AggregateFn::Count},   {"SUM", AggregateFn::Sum},
            {"MIN", AggregateFn::Min},       {"MAX", AggregateFn::Max},
            {"AVG", AggregateFn::Avg},       {"SAMPLE", AggregateFn::Sample},
            {"GROUP_CONCAT", AggregateFn::GroupConcat},
        };
        for (const auto& [name, fn] : fns) {
            if (at_keyword(name)) {
                shift();
                return fn;
            }
        }
        fail("expected aggregate function");
    }

    Query parse_ask() {
        Query q;
        q.form = QueryForm::Ask;
        expect_keyword("ASK");
        if (at_keyword("WHERE")) shift();
        q.pattern = parse_group();
        return q;
    }

    Query parse_construct() {
        Query q;
        q.form = QueryForm::Construct;
        expect_keyword("CONSTRUCT");
        expect(Tok::LBrace, "'{'");
        while (cur_.type != Tok::RBrace) {
            for (auto& t : parse_triples_same_subject()) {
                if (!t.predicate.is_single())
                    fail("sequence paths are not allowed in CONSTRUCT templates");
                q.construct_template.push_back(std::move(t));
            }
            if (cur_.type == Tok::Dot) shift();
        }
        shift();  // }
        if (at_keyword("WHERE")) shift();
        q.pattern = parse_group();
        parse_solution_modifiers(q);
        return q;
    }

    void parse_solution_modifiers(Query& q) {
        if (at_keyword("GROUP")) {
            shift();
            expect_keyword("BY");
            while (cur_.type == Tok::Variable) {
                q.group_by.push_back(RDFTerm::variable(cur_.text));
                shift();
            }
            if (q.group_by.empty()) fail("expected GROUP BY variables");
        }
        if (at_keyword("ORDER")) {
            shift();
            expect_keyword("BY");
            for (;;) {
                OrderKey key;
                if (at_keyword("ASC") || at_keyword("DESC")) {
                    key.descending = at_keyword("DESC");
                    shift();
                    expect(Tok::LParen, "'('");
                    if (cur_.type != Tok::Variable) fail("expected variable in ORDER BY");
                    key.var = RDFTerm::variable(cur_.text);
                    shift();
                    expect(Tok::RParen, "')'");
                } else if (cur_.type == Tok::Variable) {
                    key.var = RDFTerm::variable(cur_.text);
                    shift();
                } else {
                    break;
                }
                q.order_by.push_back(std::move(key));
            }
            if (q.order_by.empty()) fail("expected ORDER BY keys");
        }
        // LIMIT and OFFSET in either order.
        for (int i = 0; i < 2; ++i) {
            if (at_keyword("LIMIT")) {
                shift();
                if (cur_.type != Tok::Integer) fail("expected integer after LIMIT");
                q.limit = std::stoull(cur_.text);
                shift();
            } else if (at_keyword("OFFSET")) {
                shift();
                if (cur_.type != Tok::Integer) fail("expected integer after OFFSET");
                q.offset = std::stoull(cur_.text);
                shift();
            }
        }
    }

    // --- group graph patterns -------------------------------------------

    GraphPattern unit_pattern() {
        ValuesBlock unit;
        unit.rows.push_back({});
        return GraphPattern::inline_values(std::move(unit));
    }

    GraphPattern parse_group() {
        expect(Tok::LBrace, "'{'");
        if (at_keyword("SELECT")) {
            Query sub = parse_select();
            expect(Tok::RBrace, "'}'");
            return GraphPattern::subselect(std::move(sub));
        }
        return parse_group_body_after_lbrace();
    }

    GraphPattern parse_group_or_union_or_subselect() {
        GraphPattern first = parse_group();
        while (at_keyword("UNION")) {
            shift();
            GraphPattern next = parse_group();
            first = GraphPattern::alternative(std::move(first), std::move(next));
        }
        return first;
    }

    GraphPattern parse_group_body_after_lbrace() {
        std::optional<GraphPattern> acc;
        std::vector<Condition> filters;
        auto fold = [&](GraphPattern elem) {
            if (!acc)
                acc = std::move(elem);
            else
                acc = GraphPattern::conj(std::move(*acc), std::move(elem));
        };
        while (cur_.type != Tok::RBrace) {
            if (cur_.type == Tok::Eof) fail("unterminated group");
            if (cur_.type == Tok::Placeholder)
                fail("placeholder [" + cur_.text + "] in query; instantiate the template first");
            if (at_keyword("OPTIONAL")) {
                shift();
                GraphPattern inner = parse_group();
                if (!acc) acc = unit_pattern();
                acc = GraphPattern::optional(std::move(*acc), std::move(inner));
            } else if (at_keyword("MINUS")) {
                shift();
                GraphPattern inner = parse_group();
                if (!acc) acc = unit_pattern();
                acc = GraphPattern::minus(std::move(*acc), std::move(inner));
            } else if (at_keyword("FILTER")) {
                shift();
                filters.push_back(parse_constraint());
            } else if (at_keyword("GRAPH")) {
                shift();
                RDFTerm name = parse_var_or_iri();
                GraphPattern inner = parse_group();
                fold(GraphPattern::named_graph(std::move(name), std::move(inner)));
            } else if (at_keyword("VALUES") || at_keyword("BINDINGS")) {
                shift();
                fold(GraphPattern::inline_values(parse_values_block()));
            } else if (cur_.type == Tok::LBrace) {
                fold(parse_group_or_union_or_subselect());
            } else if (cur_.type == Tok::Dot) {
                shift();
            } else {
                for (auto& t : parse_triples_same_subject())
                    fold(GraphPattern::triple_pattern(std::move(t)));
                if (cur_.type == Tok::Dot) shift();
            }
        }
        shift();  // }
        if (!acc) acc = unit_pattern();
        for (auto& c : filters) acc = GraphPattern::filter(std::move(*acc), std::move(c));
        return std::move(*acc);
    }

    ValuesBlock parse_values_block() {
        ValuesBlock block;
        bool parenthesized = false;
        if (cur_.type == Tok::Variable) {
            block.vars.push_back(RDFTerm::variable(cur_.text));
            shift();
        } else if (cur_.type == Tok::LParen) {
            parenthesized = true;
            shift();
            while (cur_.type == Tok::Variable) {
                block.vars.push_back(RDFTerm::variable(cur_.text));
                shift();
            }
            expect(Tok::RParen, "')'");
        } else {
            fail("expected VALUES variable list");
        }
        expect(Tok::LBrace, "'{'");
        while (cur_.type != Tok::RBrace) {
            std::vector<std::optional<RDFTerm>> row;
            if (parenthesized || block.vars.empty()) {
                expect(Tok::LParen, "'('");
                while (cur_.type != Tok::RParen) row.push_back(parse_data_value());
                shift();  // )
            } else {
                row.push_back(parse_data_value());
            }
            if (row.size() != block.vars.size())
                fail("VALUES row arity does not match variable list");
            block.rows.push_back(std::move(row));
        }
        shift();  // }
        return block;
    }

    std::optional<RDFTerm> parse_data_value() {
        if (at_keyword("UNDEF")) {
            shift();
            return std::nullopt;
        }
        RDFTerm t = parse_graph_term();
        if (t.is_variable()) fail("variables are not allowed in VALUES data");
        return t;
    }

    Condition parse_constraint() {
        if (cur_.type == Tok::LParen) {
            shift();
            Condition c = parse_or_expr();
            expect(Tok::RParen, "')'");
            return c;
        }
        return parse_builtin_call();
    }

    Condition parse_or_expr() {
        Condition c = parse_and_expr();
        while (cur_.type == Tok::OrOr) {
            shift();
            c = Condition::disj(std::move(c), parse_and_expr());
        }
        return c;
    }

    Condition parse_and_expr() {
        Condition c = parse_unary_expr();
        while (cur_.type == Tok::AndAnd) {
            shift();
            c = Condition::conj(std::move(c), parse_unary_expr());
        }
        return c;
    }

    Condition parse_unary_expr() {
        if (cur_.type == Tok::Bang) {
            shift();
            return Condition::negate(parse_unary_expr());
        }
        if (cur_.type == Tok::LParen) {
            shift();
            Condition c = parse_or_expr();
            expect(Tok::RParen, "')'");
            return c;
        }
        if (at_keyword("BOUND") || at_keyword("ISBLANK") || at_keyword("ISIRI") ||
            at_keyword("ISURI"))
            return parse_builtin_call();
        // comparison: term (op term)?
        RDFTerm lhs = parse_expr_term();
        Condition::Cmp op;
        switch (cur_.type) {
            case Tok::Eq: op = Condition::Cmp::Eq; break;
            case Tok::Ne: op = Condition::Cmp::Ne; break;
            case Tok::Lt: op = Condition::Cmp::Lt; break;
            case Tok::Gt: op = Condition::Cmp::Gt; break;
            case Tok::Le: op = Condition::Cmp::Le; break;
            case Tok::Ge: op = Condition::Cmp::Ge; break;
            default:
                fail("expected comparison operator");
        }
        shift();
        RDFTerm rhs = parse_expr_term();
        return Condition::compare(op, std::move(lhs), std::move(rhs));
    }

    Condition parse_builtin_call() {
        Condition::Kind kind;
        if (at_keyword("BOUND")) kind = Condition::Kind::Bound;
        else if (at_keyword("ISBLANK")) kind = Condition::Kind::IsBlank;
        else if (at_keyword("ISIRI") || at_keyword("ISURI")) kind = Condition::Kind::IsIri;
        else fail("expected built-in call");
        shift();
        expect(Tok::LParen, "'('");
        RDFTerm operand = parse_expr_term();
        expect(Tok::RParen, "')'");
        switch (kind) {
            case Condition::Kind::Bound:
                if (!operand.is_variable()) fail("bound() takes a variable");
                return Condition::bound(std::move(operand));
            case Condition::Kind::IsBlank: return Condition::is_blank(std::move(operand));
            default: return Condition::is_iri(std::move(operand));
        }
    }

    RDFTerm parse_expr_term() {
        if (cur_.type == Tok::Variable) {
            RDFTerm t = RDFTerm::variable(cur_.text);
            shift();
            return t;
        }
        return parse_graph_term();
    }

    RDFTerm parse_var_or_iri() {
        if (cur_.type == Tok::Variable) {
            RDFTerm t = RDFTerm::variable(cur_.text);
            shift();
            return t;
        }
        if (cur_.type == Tok::IriRef) {
            RDFTerm t = RDFTerm::iri(resolve_iri(cur_.text, cur_));
            shift();
            return t;
        }
        if (cur_.type == Tok::PName) {
            RDFTerm t = RDFTerm::iri(expand_pname(cur_));
            shift();
            return t;
        }
        fail("expected variable or IRI");
    }

    RDFTerm parse_graph_term() {
        switch (cur_.type) {
            case Tok::IriRef: {
                RDFTerm t = RDFTerm::iri(resolve_iri(cur_.text, cur_));
                shift();
                return t;
            }
            case Tok::PName: {
                RDFTerm t = RDFTerm::iri(expand_pname(cur_));
                shift();
                return t;
            }
            case Tok::Variable: {
                RDFTerm t = RDFTerm::variable(cur_.text);
                shift();
                return t;
            }
            case Tok::BlankLabel: {
                RDFTerm t = RDFTerm::blank(renamed_blank(cur_.text));
                shift();
                return t;
            }
            case Tok::String: {
                std::string value = cur_.text;
                shift();
                if (cur_.type == Tok::LangTag) {
                    std::string tag = cur_.text;
                    shift();
                    return RDFTerm::literal(std::move(value), "", std::move(tag));
                }
                if (cur_.type == Tok::DtSep) {
                    shift();
                    RDFTerm dt = parse_var_or_iri();
                    if (!dt.is_iri()) fail("datatype must be an IRI");
                    return RDFTerm::literal(std::move(value), dt.lexical);
                }
                return RDFTerm::literal(std::move(value));
            }
            case Tok::Integer: {
                RDFTerm t = RDFTerm::literal(cur_.text, iris::xsd_integer);
                shift();
                return t;
            }
            case Tok::Decimal: {
                RDFTerm t = RDFTerm::literal(cur_.text, iris::xsd_decimal);
                shift();
                return t;
            }
            case Tok::Double: {
                RDFTerm t = RDFTerm::literal(cur_.text, iris::xsd_double);
                shift();
                return t;
            }
            case Tok::Keyword:
                if (at_keyword("TRUE") || at_keyword("FALSE")) {
                    RDFTerm t = RDFTerm::literal(at_keyword("TRUE") ? "true" : "false",
                                                 iris::xsd_boolean);
                    shift();
                    return t;
                }
                fail("unexpected identifier in term position");
            case Tok::Placeholder:
                fail("placeholder [" + cur_.text + "] in query; instantiate the template first");
            default:
                fail("expected term");
        }
    }

    std::string renamed_blank(const std::string& label) {
        auto it = blank_renames_.find(label);
        if (it != blank_renames_.end()) return it->second;
        std::string fresh = "b" + std::to_string(blank_counter_++);
        blank_renames_[label] = fresh;
        return fresh;
    }

    std::vector<TriplePattern> parse_triples_same_subject() {
        std::vector<TriplePattern> out;
        RDFTerm subject = parse_subject();
        for (;;) {
            PathExpr path = parse_path();
            for (;;) {
                RDFTerm object = parse_object();
                out.emplace_back(subject, path, object);
                if (cur_.type == Tok::Comma) {
                    shift();
                    continue;
                }
                break;
            }
            if (cur_.type == Tok::Semicolon) {
                shift();
                // allow trailing ';' before '.' or '}'
                if (cur_.type == Tok::Dot || cur_.type == Tok::RBrace) break;
                continue;
            }
            break;
        }
        return out;
    }

    RDFTerm parse_subject() {
        RDFTerm t = parse_graph_term();
        if (t.is_literal()) fail("literal in subject position");
        return t;
    }

    RDFTerm parse_object() { return parse_graph_term(); }

    PathExpr parse_path() {
        PathExpr path;
        path.steps.push_back(parse_path_step());
        while (cur_.type == Tok::Slash) {
            shift();
            path.steps.push_back(parse_path_step());
        }
        return path;
    }

    RDFTerm parse_path_step() {
        if (at_keyword("A")) {
            shift();
            return RDFTerm::iri(iris::rdf_type);
        }
        RDFTerm t = parse_var_or_iri();
        return t;
    }

    void validate(const Query& q) {
        if (q.form == QueryForm::Select && !q.select_all && q.has_aggregates()) {
            for (const auto& var : q.plain_projected()) {
                bool grouped = std::find(q.group_by.begin(), q.group_by.end(), var) !=
                               q.group_by.end();
                if (!grouped)
                    throw ParseError("variable ?" + var.lexical +
                                         " is projected alongside aggregates but not grouped",
                                     1, 1);
            }
        }
    }
};

}  // namespace

Query parse_query(const std::string& text, const std::string& base) {
    Parser parser(text, base);
    return parser.parse();
}

}  // namespace sparqlopt
