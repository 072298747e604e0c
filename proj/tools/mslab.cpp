#include <mslab/scenario.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <future>
#include <iostream>

namespace fs = std::filesystem;
using mslab::cli::json;

namespace {

struct Args {
    std::string input;
    std::optional<int> order;
    std::string flavor = "standard";
    std::string format = "json";
    unsigned seed = 1;
    std::string fault;
};

void emit(const json& rep, const std::string& format) {
    if (format == "text")
        std::cout << mslab::cli::text_report(rep);
    else
        std::cout << rep.dump(2) << "\n";
}

mslab::cli::Options options_of(const Args& a, std::optional<std::string> only) {
    mslab::cli::Options o;
    o.order = mslab::cli::default_order(a.order);
    o.flavor = a.flavor;
    o.seed = a.seed;
    o.only = std::move(only);
    if (!a.fault.empty()) o.inject_fault = a.fault;
    return o;
}

int run_batch(const Args& a, const mslab::cli::Options& o) {
    std::vector<std::string> files;
    for (auto& e : fs::directory_iterator(a.input))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    std::vector<std::future<mslab::cli::RunResult>> jobs;
    for (auto& f : files) jobs.push_back(std::async(std::launch::async, [f, &o] { return mslab::cli::run_scenario(f, o); }));
    json batch = json::array();
    int code = 0;
    for (auto& j : jobs) {
        auto r = j.get();
        code = std::max(code, r.code);
        batch.push_back(r.report);
    }
    json rep{{"report_schema", mslab::cli::kReportSchema}, {"tool", "mslab"}, {"version", mslab::cli::kToolVersion}, {"batch", batch}, {"exit_code", code}};
    emit(rep, a.format);
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mslab: exact computations with Deligne systems, monodromy cones and height pairings"};
    app.require_subcommand(1);
    app.set_version_flag("--version", mslab::cli::kToolVersion);
    Args a;
    auto common = [&](CLI::App* sc, bool need_input) {
        auto* in = sc->add_option("--input,-i", a.input, "scenario file (a directory for batch)");
        if (need_input) in->required();
        sc->add_option("--order", a.order, "truncation order (default 8, or MSLAB_ORDER)")->check(CLI::Range(0, 64));
        sc->add_option("--flavor", a.flavor, "chart flavor")->check(CLI::IsMember({"standard", "narrower"}));
        sc->add_option("--format", a.format, "report format")->check(CLI::IsMember({"json", "text"}));
        sc->add_option("--seed", a.seed, "generator seed");
        sc->add_option("--inject-fault", a.fault, "perturb one selftest suite")->group("");
    };
    for (auto& k : mslab::cli::task_kinds()) common(app.add_subcommand(k, "run the " + k + " tasks of a scenario"), k != "selftest");
    common(app.add_subcommand("run", "run every task of a scenario"), true);
    common(app.add_subcommand("batch", "run every *.json scenario in a directory"), true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : mslab::cli::kSchema;
    }
    std::string cmd = app.get_subcommands().front()->get_name();

    if (cmd == "batch") {
        if (!fs::is_directory(a.input)) {
            std::cerr << "mslab: " << a.input << " is not a directory\n";
            return mslab::cli::kSchema;
        }
        return run_batch(a, options_of(a, std::nullopt));
    }
    if (cmd == "selftest" && a.input.empty()) {
        auto o = options_of(a, std::nullopt);
        mslab::cli::Scenario S;
        S.tasks.push_back({"selftest", json::object()});
        auto r = mslab::cli::run_task(S, S.tasks[0], o);
        r.out["index"] = 0;
        json rep = mslab::cli::report_header("selftest", mslab::cli::fnv1a_hex(""), o);
        rep["tasks"] = json::array({r.out});
        rep["exit_code"] = r.code;
        emit(rep, a.format);
        return r.code;
    }
    auto o = options_of(a, cmd == "run" ? std::nullopt : std::optional<std::string>(cmd));
    auto r = mslab::cli::run_scenario(a.input, o);
    emit(r.report, a.format);
    return r.code;
}
