#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "osforma/analysis.hpp"
#include "osforma/parser.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalidModel = 1;
constexpr int kRuntimeFault = 2;
constexpr int kDeadlock = 3;
constexpr int kUsage = 4;

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return false;
    std::ostringstream buf;
    buf << in.rdbuf();
    out = buf.str();
    return true;
}

// 0 on success; otherwise the exit code, diagnostics already printed.
int load_model(const std::string& path, osforma::ModelDocument& doc) {
    std::string text;
    if (!read_file(path, text)) {
        std::cerr << "osforma: cannot read '" << path << "'\n";
        return kUsage;
    }
    osforma::ParseResult result = osforma::parse_model(text);
    if (!result.ok()) {
        for (const osforma::ParseError& e : result.errors)
            std::cerr << path << ':' << e.line << ':' << e.column << ": "
                      << osforma::parse_error_kind_name(e.kind) << ": " << e.message
                      << '\n';
        return kInvalidModel;
    }
    doc = std::move(result.document);
    return kOk;
}

int cmd_validate(const std::string& path) {
    osforma::ModelDocument doc;
    return load_model(path, doc);
}

std::optional<std::uint32_t> quantum_from_env() {
    const char* env = std::getenv("OSFORMA_QUANTUM");
    if (env == nullptr || *env == '\0')
        return std::nullopt;
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || v == 0 || v > 0xffffffffull) {
        std::cerr << "osforma: OSFORMA_QUANTUM must be a positive 32-bit integer, got '"
                  << env << "'\n";
        std::exit(kUsage);
    }
    return static_cast<std::uint32_t>(v);
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> steps,
            const std::string& trace_path, std::optional<std::uint32_t> quantum) {
    osforma::ModelDocument doc;
    if (int rc = load_model(path, doc); rc != kOk)
        return rc;

    osforma::EngineConfig cfg;
    cfg.quantum = quantum ? quantum : quantum_from_env();
    cfg.max_steps = steps;
    try {
        osforma::Engine engine = osforma::Engine::build(doc, cfg);
        osforma::RunResult result = engine.run();
        if (!trace_path.empty()) {
            std::ofstream out(trace_path, std::ios::binary);
            if (!out) {
                std::cerr << "osforma: cannot write '" << trace_path << "'\n";
                return kUsage;
            }
            osforma::write_trace(out, engine.events());
        }
        std::cout << osforma::run_summary(result) << '\n';
        if (result.reason == osforma::RunReason::deadlock)
            return kDeadlock;
        if (result.faulted > 0)
            return kRuntimeFault;
        return kOk;
    } catch (const osforma::ModelError& e) {
        std::cerr << "osforma: " << osforma::errc_name(e.code()) << ": " << e.what()
                  << '\n';
        return kRuntimeFault;
    }
}

int cmd_analyze(const std::string& path, const std::string& kind) {
    if (kind != "deadlock" && kind != "census" && kind != "hierarchy") {
        std::cerr << "osforma: unknown analysis kind '" << kind << "'\n";
        return kUsage;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "osforma: cannot read '" << path << "'\n";
        return kUsage;
    }
    try {
        std::vector<osforma::TraceEvent> events = osforma::read_trace(in);
        if (kind == "deadlock") {
            osforma::DeadlockReport report =
                osforma::detect_deadlock(osforma::replay_final_state(events));
            for (const std::vector<std::string>& cycle : report.cycles) {
                nlohmann::ordered_json rec;
                rec["kind"] = "deadlock";
                rec["cycle"] = cycle;
                std::cout << rec.dump() << '\n';
            }
            if (report.truncated) {
                nlohmann::ordered_json rec;
                rec["kind"] = "deadlock";
                rec["truncated"] = true;
                std::cout << rec.dump() << '\n';
            }
            return report.cycles.empty() ? kOk : kDeadlock;
        }
        if (kind == "census") {
            for (const osforma::CensusRow& row : osforma::state_census(events)) {
                nlohmann::ordered_json rec;
                rec["kind"] = "census";
                rec["tick"] = row.tick;
                rec["active"] = row.active;
                rec["ready"] = row.ready;
                rec["blocked"] = row.blocked;
                std::cout << rec.dump() << '\n';
            }
            return kOk;
        }
        for (const osforma::HierarchyViolation& v :
             osforma::validate_service_hierarchy(events)) {
            nlohmann::ordered_json rec;
            rec["kind"] = "hierarchy_violation";
            rec["event_index"] = v.event_index;
            rec["message"] = v.message;
            std::cout << rec.dump() << '\n';
        }
        return kOk;
    } catch (const osforma::ModelError& e) {
        std::cerr << "osforma: " << osforma::errc_name(e.code()) << ": " << e.what()
                  << '\n';
        return kInvalidModel;
    }
}

int cmd_aggregations(const std::string& path, std::size_t layer, bool enumerate) {
    osforma::ModelDocument doc;
    if (int rc = load_model(path, doc); rc != kOk)
        return rc;
    try {
        std::vector<std::string> names;
        names.reserve(doc.layers.size());
        for (const osforma::LayerDecl& l : doc.layers)
            names.push_back(l.name);
        osforma::LayerSystem sys(doc.layers.size(), names);
        for (const osforma::ResourceDecl& r : doc.resources)
            sys.assign_resource(r.layer, r.id);

        std::size_t members = sys.layer(layer).resources.size();
        if (enumerate && members > 12) {
            std::cerr << "osforma: --enumerate is limited to layers of 12 resources, "
                      << "layer " << layer << " has " << members << '\n';
            return kUsage;
        }
        std::cout << sys.count_candidate_aggregations(layer) << '\n';
        if (enumerate) {
            for (const std::set<std::string>& subset :
                 sys.enumerate_candidate_aggregations(layer)) {
                bool first = true;
                for (const std::string& id : subset) {
                    if (!first)
                        std::cout << ',';
                    std::cout << id;
                    first = false;
                }
                std::cout << '\n';
            }
        }
        return kOk;
    } catch (const osforma::ModelError& e) {
        std::cerr << "osforma: " << osforma::errc_name(e.code()) << ": " << e.what()
                  << '\n';
        return kUsage;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Layered operating-system model toolkit"};
    app.require_subcommand(1);

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "Parse and type-check a model file");
    validate->add_option("path", validate_path, "model file")->required();

    std::string run_path, run_trace;
    std::uint64_t run_steps = 0;
    std::uint32_t run_quantum = 0;
    CLI::App* run = app.add_subcommand("run", "Simulate a model to completion");
    run->add_option("path", run_path, "model file")->required();
    CLI::Option* steps_opt = run->add_option("--steps", run_steps, "step budget");
    run->add_option("--trace", run_trace, "write the event trace to this file");
    CLI::Option* quantum_opt =
        run->add_option("--quantum", run_quantum, "time slice in steps")
            ->check(CLI::PositiveNumber);

    std::string analyze_path, analyze_kind;
    CLI::App* analyze = app.add_subcommand("analyze", "Report over a recorded trace");
    analyze->add_option("trace", analyze_path, "trace file")->required();
    analyze->add_option("--kind", analyze_kind, "deadlock, census, or hierarchy")
        ->required();

    std::string agg_path;
    std::size_t agg_layer = 0;
    bool agg_enumerate = false;
    CLI::App* aggregations =
        app.add_subcommand("aggregations", "Count control aggregations of a layer");
    aggregations->add_option("path", agg_path, "model file")->required();
    aggregations->add_option("--layer", agg_layer, "layer index")->required();
    aggregations->add_flag("--enumerate", agg_enumerate, "list every subset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    if (validate->parsed())
        return cmd_validate(validate_path);
    if (run->parsed())
        return cmd_run(run_path,
                       steps_opt->count() ? std::optional<std::uint64_t>(run_steps)
                                          : std::nullopt,
                       run_trace,
                       quantum_opt->count() ? std::optional<std::uint32_t>(run_quantum)
                                            : std::nullopt);
    if (analyze->parsed())
        return cmd_analyze(analyze_path, analyze_kind);
    if (aggregations->parsed())
        return cmd_aggregations(agg_path, agg_layer, agg_enumerate);
    return kUsage;
}
