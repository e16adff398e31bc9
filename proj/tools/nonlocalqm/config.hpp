#pragma once

// YAML experiment configs: typed block access with file:line:column
// diagnostics and rejection of unknown keys.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

namespace nonlocalqm::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A mapping node plus the dotted path and source file it came from.
class Block {
public:
    Block(YAML::Node node, std::string path, std::string file)
        : node_(std::move(node)), path_(std::move(path)), file_(std::move(file)) {}

    const std::string& path() const { return path_; }
    const YAML::Node& node() const { return node_; }

    [[noreturn]] void fail_at(const YAML::Node& n, const std::string& msg) const {
        std::ostringstream os;
        os << file_;
        const YAML::Mark m = n.IsDefined() ? n.Mark() : node_.Mark();
        if (m.line >= 0) os << ':' << m.line + 1 << ':' << m.column + 1;
        os << ": " << msg;
        throw ConfigError(os.str());
    }
    [[noreturn]] void fail(const std::string& msg) const { fail_at(node_, msg); }

    bool has(const std::string& key) const {
        seen_.insert(key);
        return node_[key].IsDefined() && !node_[key].IsNull();
    }

    Block block(const std::string& key) const {
        seen_.insert(key);
        const YAML::Node n = node_[key];
        if (!n.IsDefined() || n.IsNull()) fail("missing required block '" + qualified(key) + "'");
        if (!n.IsMap()) fail_at(n, "'" + qualified(key) + "' must be a mapping");
        return Block(n, qualified(key), file_);
    }
    std::optional<Block> optional_block(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        return block(key);
    }

    double number(const std::string& key) const { return scalar<double>(required(key), key, "a number"); }
    double number(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }
    std::int64_t integer(const std::string& key) const {
        return scalar<std::int64_t>(required(key), key, "an integer");
    }
    std::int64_t integer(const std::string& key, std::int64_t fallback) const {
        return has(key) ? integer(key) : fallback;
    }
    std::size_t count(const std::string& key, std::size_t fallback) const {
        if (!has(key)) return fallback;
        const std::int64_t v = integer(key);
        if (v < 0) fail_at(node_[key], qualified(key) + " must be non-negative");
        return static_cast<std::size_t>(v);
    }
    bool boolean(const std::string& key, bool fallback) const {
        return has(key) ? scalar<bool>(required(key), key, "true or false") : fallback;
    }
    std::string string(const std::string& key) const { return scalar<std::string>(required(key), key, "a string"); }
    std::string string(const std::string& key, const std::string& fallback) const {
        return has(key) ? string(key) : fallback;
    }
    /// Value must be one of `allowed`.
    std::string choice(const std::string& key, const std::vector<std::string>& allowed,
                       const std::optional<std::string>& fallback = std::nullopt) const {
        if (!has(key)) {
            if (fallback) return *fallback;
            required(key);
        }
        const std::string v = string(key);
        for (const std::string& a : allowed)
            if (a == v) return v;
        std::string list;
        for (const std::string& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail_at(node_[key], qualified(key) + ": '" + v + "' is not one of {" + list + "}");
    }

    std::vector<double> numbers(const std::string& key) const {
        const YAML::Node n = required(key);
        if (!n.IsSequence()) fail_at(n, qualified(key) + " must be a list of numbers");
        std::vector<double> out;
        for (const YAML::Node& e : n) out.push_back(scalar<double>(e, key, "a number"));
        return out;
    }
    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
        return has(key) ? numbers(key) : fallback;
    }
    std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback) const {
        if (!has(key)) return fallback;
        const YAML::Node n = required(key);
        if (!n.IsSequence()) fail_at(n, qualified(key) + " must be a list of strings");
        std::vector<std::string> out;
        for (const YAML::Node& e : n) out.push_back(scalar<std::string>(e, key, "a string"));
        return out;
    }

    /// Rejects keys that were never looked up.
    void finish() const {
        for (const auto& kv : node_) {
            const std::string k = kv.first.as<std::string>();
            if (!seen_.count(k)) fail_at(kv.first, "unknown key '" + qualified(k) + "'");
        }
    }

    /// Checks a value-level condition and reports it at the key's location.
    void check(bool ok, const std::string& key, const std::string& msg) const {
        if (!ok) fail_at(node_[key], qualified(key) + ": " + msg);
    }

private:
    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    YAML::Node required(const std::string& key) const {
        seen_.insert(key);
        const YAML::Node n = node_[key];
        if (!n.IsDefined() || n.IsNull()) fail("missing required key '" + qualified(key) + "'");
        return n;
    }

    template <class T>
    T scalar(const YAML::Node& n, const std::string& key, const char* what) const {
        if (!n.IsScalar()) fail_at(n, qualified(key) + " must be " + what);
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail_at(n, qualified(key) + " must be " + what + ", got '" + n.Scalar() + "'");
        }
    }

    YAML::Node node_;
    std::string path_;
    std::string file_;
    mutable std::set<std::string> seen_;
};

/// Root of a config document.
struct Config {
    YAML::Node root;
    std::string file;

    static Config parse(const std::string& text, const std::string& file) {
        YAML::Node root;
        try {
            root = YAML::Load(text);
        } catch (const YAML::ParserException& e) {
            throw ConfigError(file + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                              ": YAML syntax error: " + e.msg);
        }
        if (!root.IsDefined() || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
        if (!root.IsMap()) throw ConfigError(file + ": top level must be a mapping");
        return {root, file};
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError(path + ": cannot open config file");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    Block top() const { return Block(root, "", file); }

    /// Deep copy with `dotted` (e.g. "model.l_P") replaced by a scalar.
    Config with(const std::string& dotted, double value) const {
        Config c{YAML::Clone(root), file};
        YAML::Node cur = c.root;
        std::string rest = dotted;
        std::vector<std::string> parts;
        for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1))
            parts.push_back(rest.substr(0, pos));
        parts.push_back(rest);
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
            YAML::Node next = cur[parts[i]];
            if (!next.IsMap()) throw ConfigError(file + ": sweep parameter '" + dotted + "' does not name a block key");
            cur.reset(next);
        }
        if (!cur[parts.back()].IsDefined() || !cur[parts.back()].IsScalar())
            throw ConfigError(file + ": sweep parameter '" + dotted + "' does not name an existing scalar");
        std::ostringstream os;
        os.precision(17);
        os << value;
        cur[parts.back()] = os.str();
        return c;
    }
};

}  // namespace nonlocalqm::cli
