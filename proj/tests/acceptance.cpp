// acceptance.cpp — runs every acceptance criterion at its stated tolerance, one PASS/FAIL line each

#include "mqc/checks.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <set>

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria A1-A11"};
    int jobs = 1;
    std::vector<std::string> only;
    app.add_option("--jobs", jobs, "worker threads");
    app.add_option("--only", only, "subset of criteria, e.g. A1 A8");
    CLI11_PARSE(app, argc, argv);

    const std::set<std::string> selected(only.begin(), only.end());
    auto wanted = [&](const char* id) { return selected.empty() || selected.count(id) > 0; };

    std::vector<mqc::CheckResult> results;
    auto emit = [&](mqc::CheckResult r) {
        std::cout << r << std::endl;
        results.push_back(std::move(r));
    };

    using mqc::pi;
    if (wanted("A1")) emit(mqc::check_classical_anchor(jobs));
    if (wanted("A2")) emit(mqc::check_unraveling_average(500, jobs));
    if (wanted("A3")) emit(mqc::check_noise_statistics());
    if (wanted("A4")) emit(mqc::check_attractor_overlay());

    if (wanted("A5") || wanted("A6") || wanted("A7")) {
        const auto cfg = mqc::smoke_phi_config({0.0, pi / 4, pi / 2, 3 * pi / 4, pi}, jobs);
        std::vector<mqc::SweepRow> rows;
        try {
            rows = mqc::run_phi_sweep(cfg, false);
        } catch (const std::exception& e) {
            for (const char* id : {"A5", "A6", "A7"})
                if (wanted(id)) emit({id, "phase sweep", false, std::string("sweep aborted: ") + e.what(), 0.0});
        }
        if (!rows.empty()) {
            if (wanted("A5")) emit(mqc::check_headline(rows));
            if (wanted("A6")) emit(mqc::check_anticorrelation(rows));
            if (wanted("A7")) emit(mqc::check_protocol_robustness(mqc::row_at(rows, pi), cfg, jobs));
        }
    }

    if (wanted("A8")) emit(mqc::check_wigner_oracles());
    if (wanted("A9")) emit(mqc::check_cat_alignment(jobs));

    if (wanted("A10") || wanted("A11")) {
        const auto low = mqc::semiclassical_phase_rows(0.05, jobs);
        if (wanted("A10")) emit(mqc::check_semiclassical_gates(low, mqc::semiclassical_phase_rows(0.10, jobs)));
        if (wanted("A11")) emit(mqc::check_regime_residence(low, jobs));
    }

    int failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    std::cout << "\n" << results.size() - failed << " of " << results.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
