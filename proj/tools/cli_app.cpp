#include "cli_app.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "pls/error.hpp"
#include "pls/io.hpp"

namespace pls::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kManifestVersion = 1;

std::string flag_name(const std::string& key) {
    std::string f = key;
    for (char& c : f) {
        if (c == '_') c = '-';
    }
    return "--" + f;
}

void write_manifest(const Command& cmd, const Settings& s, Json sections) {
    Json m = Json::object();
    m["version"] = kManifestVersion;
    m["command"] = cmd.name;
    m["seed"] = s.seed();
    Json config = Json::object();
    // the output directory is where the manifest lives, not part of the run
    for (const auto& [k, v] : s.values()) {
        if (k != "out") config[k] = v;
    }
    m["config"] = std::move(config);
    for (auto& [k, v] : sections.items()) m[k] = std::move(v);
    const fs::path path = fs::path(s.str("out")) / "manifest.json";
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    f << m.dump(2) << "\n";
}

int execute(const Command& cmd, const Settings& s, std::ostream& out, std::ostream& err) {
    Json sections = cmd.body(s, out, err);
    if (cmd.writes_manifest) {
        write_manifest(cmd, s, std::move(sections));
        out << (fs::path(s.str("out")) / "manifest.json").string() << "\n";
    }
    return kExitOk;
}

// Replays a manifest: the recorded config is complete, so no defaults, config
// files or environment take part.
int rerun(const std::string& manifest_path, const std::string& out_dir, std::ostream& out, std::ostream& err) {
    std::ifstream f(manifest_path);
    if (!f) throw IoError("cannot open manifest '" + manifest_path + "'");
    Json m;
    try {
        m = Json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("manifest '" + manifest_path + "' is not valid JSON: " + e.what());
    }
    if (!m.contains("command") || !m.contains("config") || !m["config"].is_object()) {
        throw IoError("manifest '" + manifest_path + "' lacks command or config");
    }
    const Command* cmd = find_command(m["command"].get<std::string>());
    if (!cmd || !cmd->writes_manifest) throw IoError("manifest names an unknown command");
    std::map<std::string, std::string> recorded;
    for (auto& [k, v] : m["config"].items()) {
        if (!v.is_string()) throw IoError("manifest config values must be strings");
        recorded[k] = v.get<std::string>();
    }
    for (const auto& key : cmd->keys) {
        if (key.name != "out" && !recorded.count(key.name)) {
            throw IoError("manifest config lacks '" + key.name + "'");
        }
    }
    recorded["out"] = out_dir.empty() ? fs::path(manifest_path).parent_path().string() : out_dir;
    if (recorded["out"].empty()) recorded["out"] = ".";
    return execute(*cmd, resolve_settings(cmd->keys, recorded, {}), out, err);
}

int exit_code_of(std::exception_ptr e, std::ostream& err) {
    try {
        std::rethrow_exception(e);
    } catch (const DivergenceError& x) {
        err << "error: numerical divergence: " << x.what() << "\n";
        return kExitDivergence;
    } catch (const TransportError& x) {
        err << "error: score transport: " << x.what() << "\n";
        return kExitTransport;
    } catch (const Error& x) {
        err << "error: " << x.what() << "\n";
        return kExitUsage;
    } catch (const fs::filesystem_error& x) {
        err << "error: " << x.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& x) {
        err << "internal error: " << x.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Annealed Langevin posterior sampling for photon-limited imaging", "pls"};
    app.require_subcommand(1);

    struct Bound {
        const Command* command;
        CLI::App* sub;
        std::map<std::string, std::string> values;
        std::map<std::string, CLI::Option*> options;
        std::string config;
    };
    std::vector<std::unique_ptr<Bound>> bound;
    for (const auto& cmd : commands()) {
        auto b = std::make_unique<Bound>();
        b->command = &cmd;
        b->sub = app.add_subcommand(cmd.name, cmd.description);
        if (cmd.writes_manifest) b->sub->add_option("--config", b->config, "flat key = value config file");
        for (const auto& key : cmd.keys) {
            std::string names = flag_name(key.name);
            for (std::size_t i = 0; i < cmd.positional.size(); ++i) {
                if (cmd.positional[i] == key.name) names = key.name + "," + names;
            }
            std::string help = key.help;
            if (!key.fallback.empty()) help += " [" + key.fallback + "]";
            b->options[key.name] = b->sub->add_option(names, b->values[key.name], help);
        }
        bound.push_back(std::move(b));
    }
    std::string manifest, rerun_out;
    CLI::App* rerun_cmd = app.add_subcommand("rerun", "repeat a run from its manifest");
    rerun_cmd->add_option("manifest", manifest, "manifest.json of an earlier run")->required();
    rerun_cmd->add_option("--out", rerun_out, "output directory (default: the manifest's directory)");

    std::vector<std::string> argv_store{"pls"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (rerun_cmd->parsed()) return rerun(manifest, rerun_out, out, err);
        for (const auto& b : bound) {
            if (!b->sub->parsed()) continue;
            std::map<std::string, std::string> config, flags;
            std::string config_dir;
            if (!b->config.empty()) {
                config = io::read_config(b->config);
                config_dir = fs::absolute(b->config).parent_path().string();
            }
            for (const auto& [name, opt] : b->options) {
                if (opt->count() > 0) flags[name] = b->values[name];
            }
            return execute(*b->command, resolve_settings(b->command->keys, config, flags, config_dir), out, err);
        }
    } catch (...) {
        return exit_code_of(std::current_exception(), err);
    }
    return kExitUsage;
}

}  // namespace pls::cli
