#include "parthenos/dialect.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace parthenos {

std::string value_text(const Value& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    if (const auto* i = std::get_if<long long>(&v)) return std::to_string(*i);
    return std::get<bool>(v) ? "true" : "false";
}

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

bool is_builtin_type(const std::string& name) {
    static const std::set<std::string> builtins = {"int", "double", "boolean", "String", "void"};
    return builtins.count(name) > 0;
}

const Value* Annotation::arg(const std::string& key) const {
    for (const auto& [k, v] : args)
        if (k == key) return &v;
    return nullptr;
}

const FieldDecl* ClassDecl::field(const std::string& n) const {
    for (const auto& f : fields)
        if (f.name == n) return &f;
    return nullptr;
}

const MethodDecl* ClassDecl::method(const std::string& n) const {
    for (const auto& m : methods)
        if (m.name == n) return &m;
    return nullptr;
}

SyntaxError::SyntaxError(size_t line, size_t column, const std::string& message)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line(line),
      column(column) {}

namespace {

struct Token {
    enum Kind { Ident, Str, Int, Punct, End };
    Kind kind = End;
    std::string text;
    long long ivalue = 0;
    size_t line = 1;
    size_t column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_trivia();
        Token t;
        t.line = line_;
        t.column = col_;
        if (pos_ >= src_.size()) {
            t.kind = Token::End;
            return t;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                advance();
            t.kind = Token::Ident;
            t.text = std::string(src_.substr(start, pos_ - start));
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                advance();
            t.kind = Token::Int;
            t.text = std::string(src_.substr(start, pos_ - start));
            try {
                t.ivalue = std::stoll(t.text);
            } catch (const std::out_of_range&) {
                throw SyntaxError(t.line, t.column, "integer literal out of range");
            }
            return t;
        }
        if (c == '"') {
            advance();
            std::string out;
            while (true) {
                if (pos_ >= src_.size())
                    throw SyntaxError(t.line, t.column, "unterminated string literal");
                char d = src_[pos_];
                if (d == '"') {
                    advance();
                    break;
                }
                if (d == '\n')
                    throw SyntaxError(t.line, t.column, "unterminated string literal");
                if (d == '\\') {
                    advance();
                    if (pos_ >= src_.size())
                        throw SyntaxError(line_, col_, "dangling escape in string literal");
                    char e = src_[pos_];
                    if (e != '"' && e != '\\')
                        throw SyntaxError(line_, col_, "unsupported escape in string literal");
                    out.push_back(e);
                    advance();
                    continue;
                }
                out.push_back(d);
                advance();
            }
            t.kind = Token::Str;
            t.text = out;
            return t;
        }
        static const std::string puncts = "{}()@=,;";
        if (puncts.find(c) != std::string::npos) {
            t.kind = Token::Punct;
            t.text = std::string(1, c);
            advance();
            return t;
        }
        throw SyntaxError(line_, col_, std::string("unexpected character '") + c + "'");
    }

    // Captures the raw text between an already-consumed '{' and its matching
    // '}', counting braces at token level so strings and comments do not
    // affect the balance.
    std::string capture_balanced_block() {
        std::string out;
        int depth = 1;
        while (true) {
            if (pos_ >= src_.size())
                throw SyntaxError(line_, col_, "unterminated method body");
            char c = src_[pos_];
            if (c == '"') {
                out.push_back(c);
                advance();
                while (true) {
                    if (pos_ >= src_.size())
                        throw SyntaxError(line_, col_, "unterminated string literal");
                    char d = src_[pos_];
                    out.push_back(d);
                    advance();
                    if (d == '\\') {
                        if (pos_ >= src_.size())
                            throw SyntaxError(line_, col_, "dangling escape in string literal");
                        out.push_back(src_[pos_]);
                        advance();
                        continue;
                    }
                    if (d == '"') break;
                }
                continue;
            }
            if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') {
                    out.push_back(src_[pos_]);
                    advance();
                }
                continue;
            }
            if (c == '{') depth++;
            if (c == '}') {
                depth--;
                if (depth == 0) {
                    advance();
                    return out;
                }
            }
            out.push_back(c);
            advance();
        }
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            line_++;
            col_ = 1;
        } else {
            col_++;
        }
        pos_++;
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
                continue;
            }
            if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
                continue;
            }
            break;
        }
    }

    std::string_view src_;
    size_t pos_ = 0;
    size_t line_ = 1;
    size_t col_ = 1;
};

std::string normalize_body(const std::string& raw) {
    std::vector<std::string> lines;
    std::string current;
    auto flush = [&] {
        size_t b = current.find_first_not_of(" \t\r");
        size_t e = current.find_last_not_of(" \t\r");
        if (b != std::string::npos) lines.push_back(current.substr(b, e - b + 1));
        current.clear();
    };
    for (char c : raw) {
        if (c == '\n')
            flush();
        else
            current.push_back(c);
    }
    flush();
    std::string out;
    for (size_t i = 0; i < lines.size(); i++) {
        if (i) out.push_back('\n');
        out += lines[i];
    }
    return out;
}

class Parser {
public:
    Parser(std::string_view src, const std::string& file_path)
        : lexer_(src), file_path_(file_path) {
        tok_ = lexer_.next();
    }

    SourceUnit parse() {
        SourceUnit unit;
        unit.file_path = file_path_;
        unit.class_decl = parse_class();
        if (tok_.kind != Token::End)
            fail("expected end of file after class declaration");
        std::string stem = std::filesystem::path(file_path_).stem().string();
        if (!stem.empty() && stem != unit.class_decl.name)
            throw SyntaxError(class_name_line_, class_name_col_,
                              "class name '" + unit.class_decl.name +
                                  "' does not match file name stem '" + stem + "'");
        return unit;
    }

private:
    [[noreturn]] void fail(const std::string& message) {
        throw SyntaxError(tok_.line, tok_.column, message);
    }

    void bump() { tok_ = lexer_.next(); }

    bool at_punct(char c) const { return tok_.kind == Token::Punct && tok_.text[0] == c; }

    bool at_ident(const char* word) const { return tok_.kind == Token::Ident && tok_.text == word; }

    void expect_punct(char c, const char* what) {
        if (!at_punct(c)) fail(std::string("expected '") + c + "' " + what);
        bump();
    }

    std::string expect_ident(const char* what) {
        if (tok_.kind != Token::Ident) fail(std::string("expected ") + what);
        std::string s = tok_.text;
        bump();
        return s;
    }

    std::vector<Annotation> parse_annotations() {
        std::vector<Annotation> out;
        while (at_punct('@')) {
            bump();
            Annotation a;
            a.name = expect_ident("annotation name");
            if (at_punct('(')) {
                bump();
                if (!at_punct(')')) {
                    while (true) {
                        Token key_tok = tok_;
                        std::string key = expect_ident("annotation argument key");
                        if (a.arg(key))
                            throw SyntaxError(key_tok.line, key_tok.column,
                                              "duplicate annotation argument '" + key + "'");
                        expect_punct('=', "after annotation argument key");
                        a.args.emplace_back(key, parse_literal());
                        if (at_punct(',')) {
                            bump();
                            continue;
                        }
                        break;
                    }
                }
                expect_punct(')', "to close annotation arguments");
            }
            out.push_back(std::move(a));
        }
        return out;
    }

    Value parse_literal() {
        if (tok_.kind == Token::Str) {
            Value v = tok_.text;
            bump();
            return v;
        }
        if (tok_.kind == Token::Int) {
            Value v = tok_.ivalue;
            bump();
            return v;
        }
        if (at_ident("true")) {
            bump();
            return Value(true);
        }
        if (at_ident("false")) {
            bump();
            return Value(false);
        }
        fail("expected string, integer, or boolean literal");
    }

    ClassDecl parse_class() {
        ClassDecl decl;
        decl.annotations = parse_annotations();
        if (!at_ident("class")) fail("expected 'class'");
        bump();
        class_name_line_ = tok_.line;
        class_name_col_ = tok_.column;
        decl.name = expect_ident("class name");
        if (at_ident("extends")) {
            bump();
            decl.superclass = expect_ident("superclass name");
        }
        expect_punct('{', "to open class body");
        std::set<std::string> member_names;
        while (!at_punct('}')) {
            if (tok_.kind == Token::End) fail("expected '}' to close class body");
            parse_member(decl, member_names);
        }
        bump();
        return decl;
    }

    void parse_member(ClassDecl& decl, std::set<std::string>& member_names) {
        std::vector<Annotation> annotations = parse_annotations();
        TypeRef type{expect_ident("member type")};
        Token name_tok = tok_;
        std::string name = expect_ident("member name");
        if (member_names.count(name))
            throw SyntaxError(name_tok.line, name_tok.column,
                              "duplicate member name '" + name + "'");
        member_names.insert(name);
        if (at_punct(';')) {
            bump();
            decl.fields.push_back(FieldDecl{name, type, std::move(annotations)});
            return;
        }
        if (!at_punct('(')) fail("expected ';' or '(' after member name");
        bump();
        MethodDecl method;
        method.name = name;
        method.return_type = type;
        method.annotations = std::move(annotations);
        if (!at_punct(')')) {
            while (true) {
                TypeRef ptype{expect_ident("parameter type")};
                std::string pname = expect_ident("parameter name");
                method.params.emplace_back(pname, ptype);
                if (at_punct(',')) {
                    bump();
                    continue;
                }
                break;
            }
        }
        expect_punct(')', "to close parameter list");
        if (!at_punct('{')) fail("expected '{' to open method body");
        // Switch to raw capture: the '{' token has been recognized but the
        // body is kept as text rather than parsed.
        method.body_text = normalize_body(lexer_.capture_balanced_block());
        bump();
        decl.methods.push_back(std::move(method));
    }

    Lexer lexer_;
    std::string file_path_;
    Token tok_;
    size_t class_name_line_ = 1;
    size_t class_name_col_ = 1;
};

std::string render_literal(const Value& v) {
    if (const auto* s = std::get_if<std::string>(&v)) {
        std::string out = "\"";
        for (char c : *s) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        out.push_back('"');
        return out;
    }
    return value_text(v);
}

std::string render_annotation(const Annotation& a) {
    std::string out = "@" + a.name;
    if (a.args.empty()) return out;
    out.push_back('(');
    for (size_t i = 0; i < a.args.size(); i++) {
        if (i) out += ", ";
        out += a.args[i].first + "=" + render_literal(a.args[i].second);
    }
    out.push_back(')');
    return out;
}

}  // namespace

SourceUnit parse_unit(std::string_view text, const std::string& file_path) {
    return Parser(text, file_path).parse();
}

std::string print_unit(const SourceUnit& unit) {
    const ClassDecl& decl = unit.class_decl;
    std::string out;
    for (const auto& a : decl.annotations) out += render_annotation(a) + "\n";
    out += "class " + decl.name;
    if (decl.superclass) out += " extends " + *decl.superclass;
    out += " {";

    bool first = true;
    auto begin_member = [&](const std::vector<Annotation>& annotations) {
        out.push_back('\n');
        if (!first) out.push_back('\n');
        first = false;
        for (const auto& a : annotations) out += "    " + render_annotation(a) + "\n";
    };
    for (const auto& f : decl.fields) {
        begin_member(f.annotations);
        out += "    " + f.type.name + " " + f.name + ";";
    }
    for (const auto& m : decl.methods) {
        begin_member(m.annotations);
        out += "    " + m.return_type.name + " " + m.name + "(";
        for (size_t i = 0; i < m.params.size(); i++) {
            if (i) out += ", ";
            out += m.params[i].second.name + " " + m.params[i].first;
        }
        out += ") {";
        std::istringstream body(m.body_text);
        std::string line;
        while (std::getline(body, line)) {
            out += "\n";
            if (!line.empty()) out += "        " + line;
        }
        out += "\n    }";
    }
    out += "\n}\n";
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> list_source_files(const std::filesystem::path& repo) {
    std::error_code ec;
    if (!std::filesystem::is_directory(repo, ec))
        throw IoError("not a directory: " + repo.string());
    std::vector<std::string> files;
    for (auto it = std::filesystem::recursive_directory_iterator(repo, ec);
         it != std::filesystem::recursive_directory_iterator(); ++it) {
        if (ec) throw IoError("cannot list directory: " + repo.string());
        if (it->is_regular_file() && it->path().extension() == ".pss")
            files.push_back(std::filesystem::relative(it->path(), repo).generic_string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<ClassListing> list_classes(const std::filesystem::path& repo) {
    std::vector<ClassListing> out;
    for (const std::string& rel : list_source_files(repo)) {
        ClassListing entry;
        entry.class_name = std::filesystem::path(rel).stem().string();
        entry.file = rel;
        try {
            parse_unit(read_file(repo / rel), rel);
            entry.ok = true;
        } catch (const SyntaxError& e) {
            entry.ok = false;
            entry.error = e.what();
        }
        out.push_back(std::move(entry));
    }
    return out;
}

std::string getter_name(const std::string& attribute) {
    std::string cap = attribute;
    if (!cap.empty()) cap[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(cap[0])));
    return "get" + cap;
}

std::string setter_name(const std::string& attribute) {
    std::string cap = attribute;
    if (!cap.empty()) cap[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(cap[0])));
    return "set" + cap;
}

std::string getter_body(const std::string& attribute) {
    return "return this." + attribute + ";";
}

std::string setter_body(const std::string& attribute) {
    return "this." + attribute + " = value;";
}

}  // namespace parthenos
