#include "planshape/strips/parser.hpp"

#include <cctype>
#include <set>
#include <sstream>

namespace planshape::strips {

namespace {

const std::set<std::string> kSupportedRequirements = {
    ":strips", ":typing", ":negative-preconditions"};

struct Token {
    enum Kind { lparen, rparen, dash, symbol, end };
    Kind kind = end;
    std::string text;
    int line = 0;
    int column = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        skip_space();
        Token t;
        t.line = line_;
        t.column = column_;
        if (pos_ >= text_.size()) {
            t.kind = Token::end;
            return t;
        }
        char c = text_[pos_];
        if (c == '(') {
            advance();
            t.kind = Token::lparen;
            t.text = "(";
            return t;
        }
        if (c == ')') {
            advance();
            t.kind = Token::rparen;
            t.text = ")";
            return t;
        }
        std::string word;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
               text_[pos_] != '(' && text_[pos_] != ')') {
            word.push_back(text_[pos_]);
            advance();
        }
        if (word == "-") {
            t.kind = Token::dash;
        } else {
            t.kind = Token::symbol;
        }
        t.text = word;
        return t;
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ';') {  // comment to end of line
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

class Parser {
public:
    explicit Parser(std::string_view text) : lexer_(text) { shift(); }

    Domain domain() {
        expect(Token::lparen);
        expect_symbol("define");
        expect(Token::lparen);
        expect_symbol("domain");
        Domain d;
        d.name = symbol("domain name");
        expect(Token::rparen);
        while (cur_.kind == Token::lparen) {
            shift();
            const Token section = cur_;
            std::string keyword = symbol("section keyword");
            if (keyword == ":requirements") {
                parse_requirements(d);
            } else if (keyword == ":types") {
                parse_types(d);
            } else if (keyword == ":predicates") {
                parse_predicates(d);
            } else if (keyword == ":action") {
                parse_action(d);
            } else {
                fail("unsupported domain section '" + keyword + "'", section);
            }
        }
        expect(Token::rparen);
        expect(Token::end);
        return d;
    }

    StripsProblem problem(const Domain& domain) {
        expect(Token::lparen);
        expect_symbol("define");
        expect(Token::lparen);
        expect_symbol("problem");
        StripsProblem p;
        p.name = symbol("problem name");
        expect(Token::rparen);
        while (cur_.kind == Token::lparen) {
            shift();
            const Token section = cur_;
            std::string keyword = symbol("section keyword");
            if (keyword == ":domain") {
                p.domain_name = symbol("domain name");
                if (p.domain_name != domain.name) {
                    fail("problem references domain '" + p.domain_name + "' but '" +
                             domain.name + "' was parsed",
                         section);
                }
                expect(Token::rparen);
            } else if (keyword == ":objects") {
                parse_objects(p, domain);
            } else if (keyword == ":init") {
                parse_init(p, domain);
            } else if (keyword == ":goal") {
                parse_goal(p, domain, section);
            } else {
                fail("unsupported problem section '" + keyword + "'", section);
            }
        }
        expect(Token::rparen);
        expect(Token::end);
        if (p.goal.empty()) fail("empty goal", cur_);
        return p;
    }

private:
    void shift() { cur_ = lexer_.next(); }

    [[noreturn]] void fail(const std::string& message, const Token& at) {
        throw ParseError(message, at.line, at.column);
    }

    void expect(Token::Kind kind) {
        if (cur_.kind != kind) {
            static const char* names[] = {"'('", "')'", "'-'", "symbol", "end of input"};
            fail(std::string("expected ") + names[kind] + ", got '" + cur_.text + "'", cur_);
        }
        if (kind != Token::end) shift();
    }

    std::string symbol(const std::string& what) {
        if (cur_.kind != Token::symbol) {
            fail("expected " + what + ", got '" + cur_.text + "'", cur_);
        }
        std::string s = cur_.text;
        shift();
        return s;
    }

    void expect_symbol(const std::string& text) {
        if (cur_.kind != Token::symbol || cur_.text != text) {
            fail("expected '" + text + "', got '" + cur_.text + "'", cur_);
        }
        shift();
    }

    void parse_requirements(Domain& d) {
        while (cur_.kind == Token::symbol) {
            if (!kSupportedRequirements.count(cur_.text)) {
                fail("unknown requirement '" + cur_.text + "'", cur_);
            }
            d.requirements.push_back(cur_.text);
            shift();
        }
        expect(Token::rparen);
    }

    // "name1 name2 - parent" groups, as in "(:types key door - object)".
    void parse_types(Domain& d) {
        std::vector<std::string> pending;
        while (cur_.kind != Token::rparen) {
            if (cur_.kind == Token::dash) {
                shift();
                std::string parent = symbol("supertype name");
                if (parent != "object" && !find_type(d, parent)) {
                    fail("undeclared supertype '" + parent + "'", cur_);
                }
                for (auto& name : pending) d.types.push_back({name, parent});
                pending.clear();
            } else {
                pending.push_back(symbol("type name"));
            }
        }
        for (auto& name : pending) d.types.push_back({name, "object"});
        expect(Token::rparen);
    }

    static bool find_type(const Domain& d, const std::string& name) {
        if (name == "object") return true;
        for (const auto& t : d.types) {
            if (t.name == name) return true;
        }
        return false;
    }

    std::vector<Parameter> parse_typed_params(const Domain& d) {
        std::vector<Parameter> out;
        std::vector<std::string> pending;
        while (cur_.kind != Token::rparen) {
            if (cur_.kind == Token::dash) {
                shift();
                const Token at = cur_;
                std::string type = symbol("type name");
                if (!find_type(d, type)) fail("undeclared type '" + type + "'", at);
                for (auto& name : pending) out.push_back({name, type});
                pending.clear();
            } else {
                const Token at = cur_;
                std::string name = symbol("parameter");
                if (name.empty() || name[0] != '?') {
                    fail("parameter must start with '?': '" + name + "'", at);
                }
                pending.push_back(name);
            }
        }
        for (auto& name : pending) out.push_back({name, "object"});
        expect(Token::rparen);
        return out;
    }

    void parse_predicates(Domain& d) {
        while (cur_.kind == Token::lparen) {
            shift();
            PredicateDecl decl;
            decl.name = symbol("predicate name");
            decl.params = parse_typed_params(d);
            d.predicates.push_back(std::move(decl));
        }
        expect(Token::rparen);
    }

    // An atom within an action body: predicate + parameter references.
    Literal parse_atom(const Domain& d, const std::vector<Parameter>& params, bool positive) {
        const Token at = cur_;
        Literal lit;
        lit.positive = positive;
        lit.predicate = symbol("predicate name");
        const PredicateDecl* decl = d.find_predicate(lit.predicate);
        if (!decl) fail("undeclared predicate '" + lit.predicate + "'", at);
        while (cur_.kind == Token::symbol) {
            const std::string& arg = cur_.text;
            if (arg[0] == '?') {
                bool declared = false;
                for (const auto& p : params) declared = declared || p.name == arg;
                if (!declared) fail("undeclared parameter '" + arg + "'", cur_);
            }
            lit.args.push_back(arg);
            shift();
        }
        if (lit.args.size() != decl->params.size()) {
            std::ostringstream msg;
            msg << "arity mismatch for '" << lit.predicate << "': expected "
                << decl->params.size() << " argument(s), got " << lit.args.size();
            fail(msg.str(), at);
        }
        expect(Token::rparen);
        return lit;
    }

    static bool is_connective(const std::string& word) {
        return word == "or" || word == "forall" || word == "exists" || word == "when" ||
               word == "imply" || word == "increase" || word == "decrease" ||
               word == "assign" || word == "=";
    }

    // GD := (and LIT*) | LIT ; LIT := (pred ...) | (not (pred ...))
    std::vector<Literal> parse_condition(const Domain& d, const std::vector<Parameter>& params) {
        std::vector<Literal> out;
        expect(Token::lparen);
        if (cur_.kind != Token::symbol) fail("expected condition", cur_);
        if (cur_.text == "and") {
            shift();
            while (cur_.kind == Token::lparen) {
                shift();
                out.push_back(parse_literal_body(d, params));
            }
            expect(Token::rparen);
        } else if (cur_.text == "not") {
            shift();
            expect(Token::lparen);
            out.push_back(parse_atom(d, params, false));
            expect(Token::rparen);
        } else if (is_connective(cur_.text)) {
            fail("unsupported connective '" + cur_.text + "'", cur_);
        } else {
            out.push_back(parse_atom(d, params, true));
        }
        return out;
    }

    // After an already-consumed '(' inside an (and ...) block.
    Literal parse_literal_body(const Domain& d, const std::vector<Parameter>& params) {
        if (cur_.kind != Token::symbol) fail("expected literal", cur_);
        if (cur_.text == "not") {
            shift();
            expect(Token::lparen);
            Literal lit = parse_atom(d, params, false);
            expect(Token::rparen);
            return lit;
        }
        if (cur_.text == "and" || is_connective(cur_.text)) {
            fail("unsupported connective '" + cur_.text + "'", cur_);
        }
        return parse_atom(d, params, true);
    }

    void parse_action(Domain& d) {
        ActionSchema schema;
        schema.name = symbol("action name");
        while (cur_.kind == Token::symbol && !cur_.text.empty() && cur_.text[0] == ':') {
            std::string key = cur_.text;
            shift();
            if (key == ":parameters") {
                expect(Token::lparen);
                schema.params = parse_typed_params(d);
            } else if (key == ":precondition") {
                for (auto& lit : parse_condition(d, schema.params)) {
                    schema.preconditions.push_back(std::move(lit));
                }
            } else if (key == ":effect") {
                const Token at = cur_;
                for (auto& lit : parse_condition(d, schema.params)) {
                    Fluent f{lit.predicate, lit.args};
                    if (lit.positive) {
                        schema.add.push_back(std::move(f));
                    } else {
                        schema.del.push_back(std::move(f));
                    }
                }
                for (const auto& a : schema.add) {
                    for (const auto& r : schema.del) {
                        if (a == r) fail("effect adds and deletes '" + a.str() + "'", at);
                    }
                }
            } else {
                fail("unsupported action keyword '" + key + "'", cur_);
            }
        }
        expect(Token::rparen);
        d.actions.push_back(std::move(schema));
    }

    void parse_objects(StripsProblem& p, const Domain& d) {
        std::vector<std::string> pending;
        while (cur_.kind != Token::rparen) {
            if (cur_.kind == Token::dash) {
                shift();
                const Token at = cur_;
                std::string type = symbol("type name");
                if (!find_type(d, type)) fail("undeclared object type '" + type + "'", at);
                for (auto& name : pending) p.objects.push_back({name, type});
                pending.clear();
            } else {
                pending.push_back(symbol("object name"));
            }
        }
        for (auto& name : pending) p.objects.push_back({name, "object"});
        expect(Token::rparen);
    }

    Fluent parse_ground_fluent(const StripsProblem& p, const Domain& d) {
        const Token at = cur_;
        Fluent f;
        f.predicate = symbol("predicate name");
        const PredicateDecl* decl = d.find_predicate(f.predicate);
        if (!decl) fail("unknown predicate '" + f.predicate + "'", at);
        while (cur_.kind == Token::symbol) {
            const std::string& obj = cur_.text;
            bool declared = false;
            for (const auto& o : p.objects) declared = declared || o.name == obj;
            if (!declared) fail("undeclared object '" + obj + "'", cur_);
            f.args.push_back(obj);
            shift();
        }
        if (f.args.size() != decl->params.size()) {
            fail("arity mismatch for '" + f.predicate + "'", at);
        }
        expect(Token::rparen);
        return f;
    }

    void parse_init(StripsProblem& p, const Domain& d) {
        std::vector<Fluent> fluents;
        while (cur_.kind == Token::lparen) {
            shift();
            fluents.push_back(parse_ground_fluent(p, d));
        }
        expect(Token::rparen);
        p.init = FluentSet(std::move(fluents));
    }

    void parse_goal(StripsProblem& p, const Domain& d, const Token& section) {
        std::vector<Fluent> fluents;
        expect(Token::lparen);
        if (cur_.kind == Token::symbol && cur_.text == "and") {
            shift();
            while (cur_.kind == Token::lparen) {
                shift();
                if (cur_.kind == Token::symbol && cur_.text == "not") {
                    fail("negative goal literals are not supported", cur_);
                }
                fluents.push_back(parse_ground_fluent(p, d));
            }
            expect(Token::rparen);
        } else if (cur_.kind == Token::symbol && cur_.text == "not") {
            fail("negative goal literals are not supported", cur_);
        } else {
            fluents.push_back(parse_ground_fluent(p, d));
        }
        expect(Token::rparen);
        if (fluents.empty()) fail("empty goal", section);
        p.goal = FluentSet(std::move(fluents));
    }

    Lexer lexer_;
    Token cur_;
};

}  // namespace

ParseError::ParseError(const std::string& message, int line, int column)
    : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                         std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

Domain parse_domain(std::string_view text) { return Parser(text).domain(); }

StripsProblem parse_problem(std::string_view text, const Domain& domain) {
    return Parser(text).problem(domain);
}

}  // namespace planshape::strips
