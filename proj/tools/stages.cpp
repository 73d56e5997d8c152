#include "stages.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "courtaudit/assignment_audit.hpp"
#include "courtaudit/dataset_io.hpp"
#include "courtaudit/deviation_audit.hpp"
#include "courtaudit/evaluation.hpp"
#include "courtaudit/explain.hpp"
#include "courtaudit/manifest.hpp"
#include "courtaudit/pipeline.hpp"
#include "courtaudit/predictors.hpp"
#include "courtaudit/rng.hpp"
#include "courtaudit/shapley.hpp"
#include "courtaudit/synthetic.hpp"
#include "courtaudit/text_io.hpp"

namespace courtaudit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- plumbing

std::string manifest_name(std::string stage) {
    std::replace(stage.begin(), stage.end(), '-', '_');
    return "manifest_" + stage + ".json";
}

void require_artifact(const fs::path& path, const std::string& producer) {
    if (!fs::exists(path))
        throw std::runtime_error("missing prerequisite artifact " +
                                 path.filename().string() + " (run '" + producer +
                                 "' first)");
}

// digests one file, or every regular file under a directory, into the map
void record(std::map<std::string, std::string>& digests, const fs::path& out,
            const fs::path& target) {
    if (fs::is_directory(target)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::recursive_directory_iterator(target))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files)
            digests[fs::relative(file, out).generic_string()] = sha256_file(file);
        return;
    }
    digests[fs::relative(target, out).generic_string()] = sha256_file(target);
}

struct StageWriter {
    Manifest manifest;
    fs::path out;

    StageWriter(const std::string& stage, const RunConfig& cfg,
                const std::vector<std::string>& sections, std::uint64_t seed,
                fs::path out_dir)
        : out(std::move(out_dir)) {
        manifest.stage = stage;
        manifest.seed = seed;
        manifest.parameters = cfg.section(sections);
    }

    void input(const fs::path& path) { record(manifest.inputs, out, path); }
    void output(const fs::path& path) { record(manifest.outputs, out, path); }
    void finish() { manifest.write(out / manifest_name(manifest.stage)); }
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

// ------------------------------------------------------------- shared i/o

Dataset load_canonical(const fs::path& out) {
    require_artifact(out / "cases.csv", "ingest or simulate");
    require_artifact(out / "judges.csv", "ingest or simulate");
    LoadedDataset loaded =
        load_dataset(out / "cases.csv", out / "judges.csv", FileFormat::csv);
    if (!loaded.report.ok())
        throw std::runtime_error("canonical dataset fails validation; regenerate it "
                                 "with ingest or simulate");
    return std::move(loaded.data);
}

void write_embeddings_csv(const fs::path& path,
                          const std::map<std::string, Eigen::VectorXd>& embeddings) {
    if (embeddings.empty())
        throw std::runtime_error("no judge produced an embedding row");
    const Eigen::Index dims = embeddings.begin()->second.size();
    std::string text = "judge_id";
    for (Eigen::Index d = 0; d < dims; ++d)
        text += ",dim_" + std::to_string(d);
    text += '\n';
    for (const auto& [judge_id, vec] : embeddings) {
        text += judge_id;
        for (Eigen::Index d = 0; d < dims; ++d) text += ',' + format_double(vec(d));
        text += '\n';
    }
    write_file_atomic(path, text);
}

std::map<std::string, Eigen::VectorXd> read_embeddings_csv(const fs::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty() || lines[0].rfind("judge_id,dim_0", 0) != 0)
        throw std::runtime_error("unexpected header in " + path.string());
    const std::size_t dims = split_csv_line(lines[0]).size() - 1;
    std::map<std::string, Eigen::VectorXd> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != dims + 1)
            throw std::runtime_error("ragged row in " + path.string());
        Eigen::VectorXd vec(static_cast<Eigen::Index>(dims));
        for (std::size_t d = 0; d < dims; ++d)
            vec(static_cast<Eigen::Index>(d)) = std::stod(fields[d + 1]);
        out[fields[0]] = std::move(vec);
    }
    if (out.empty()) throw std::runtime_error(path.string() + " holds no rows");
    return out;
}

void write_predictions_csv(const fs::path& path,
                           const std::vector<CasePrediction>& predictions) {
    std::string text = "case_id,judge_id,probability,label\n";
    for (const auto& p : predictions)
        text += p.case_id + ',' + p.judge_id + ',' + format_double(p.probability) +
                ',' + std::to_string(p.label) + '\n';
    write_file_atomic(path, text);
}

std::vector<CasePrediction> read_predictions_csv(const fs::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty() || lines[0] != "case_id,judge_id,probability,label")
        throw std::runtime_error("unexpected header in " + path.string());
    std::vector<CasePrediction> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != 4)
            throw std::runtime_error("ragged row in " + path.string());
        out.push_back({fields[0], fields[1], std::stod(fields[2]),
                       std::stoi(fields[3])});
    }
    if (out.empty()) throw std::runtime_error(path.string() + " holds no rows");
    return out;
}

// -------------------------------------------------- config-to-struct glue

CourtConfig court_config_from(const RunConfig& cfg) {
    CourtConfig c;
    c.n_judges = cfg.integer("simulate.judges");
    c.n_cases = cfg.integer("simulate.cases");
    c.n_case_types = cfg.integer("simulate.case_types");
    c.n_circuits = cfg.integer("simulate.circuits");
    c.start_year = cfg.integer("simulate.start_year");
    c.n_years = cfg.integer("simulate.years");
    const std::string mode = cfg.text("simulate.assignment");
    if (mode == "random") c.assignment_mode = AssignmentMode::random;
    else if (mode == "biased") c.assignment_mode = AssignmentMode::biased;
    else throw std::invalid_argument("simulate.assignment must be random or biased");
    c.assignment_strength = cfg.real("simulate.assignment_strength");
    c.base_win_rate = cfg.real("simulate.base_win_rate");
    const std::string bias = cfg.text("simulate.bias_mode");
    if (bias == "uniform_shift") c.bias_mode = BiasMode::uniform_shift;
    else if (bias == "case_type_interaction")
        c.bias_mode = BiasMode::case_type_interaction;
    else
        throw std::invalid_argument(
            "simulate.bias_mode must be uniform_shift or case_type_interaction");
    c.bias_fraction = cfg.real("simulate.bias_fraction");
    c.planted_bias = cfg.real("simulate.planted_bias");
    c.date_drift = cfg.real("simulate.date_drift");
    c.k_pools = cfg.integer("simulate.k_pools");
    c.n_precedents = cfg.integer("simulate.n_precedents");
    c.citations_per_case = cfg.integer("simulate.citations_per_case");
    c.ideology_bias_link = cfg.real("simulate.ideology_link");
    c.seed = cfg.seed("simulate.seed");
    return c;
}

CitationMatrixOptions citation_options_from(const RunConfig& cfg) {
    CitationMatrixOptions opt;
    opt.fraction = cfg.real("embed.fraction");
    opt.n_top = static_cast<std::size_t>(cfg.integer("embed.n_top"));
    opt.exclude_self_citations = cfg.flag("embed.exclude_self_citations");
    opt.global_reference_set = cfg.flag("embed.global_reference_set");
    return opt;
}

NmfConfig nmf_config_from(const RunConfig& cfg) {
    NmfConfig nmf;
    nmf.k = cfg.integer("embed.k");
    nmf.l1_w = cfg.real("embed.l1_w");
    nmf.l2_w = cfg.real("embed.l2_w");
    nmf.l1_h = cfg.real("embed.l1_h");
    nmf.l2_h = cfg.real("embed.l2_h");
    nmf.tol = cfg.real("embed.tol");
    nmf.max_iter = cfg.integer("embed.max_iter");
    nmf.seed = cfg.seed("embed.seed");
    return nmf;
}

GbdtConfig gbdt_config_from(const RunConfig& cfg) {
    GbdtConfig g;
    g.n_estimators = cfg.integer("train.n_estimators");
    g.max_depth = cfg.integer("train.max_depth");
    g.learning_rate = cfg.real("train.learning_rate");
    g.min_leaf = cfg.integer("train.min_leaf");
    g.max_bins = cfg.integer("train.max_bins");
    return g;
}

GbdtCvConfig cv_config_from(const RunConfig& cfg) {
    GbdtCvConfig cv;
    cv.folds = cfg.integer("train.cv_folds");
    cv.n_estimators_grid = cfg.int_list("train.n_estimators_grid");
    cv.max_depth_grid = cfg.int_list("train.max_depth_grid");
    cv.learning_rate_grid = cfg.real_list("train.learning_rate_grid");
    cv.min_leaf = cfg.integer("train.min_leaf");
    cv.max_bins = cfg.integer("train.max_bins");
    return cv;
}

PredictabilityParams predictability_params_from(const RunConfig& cfg) {
    PredictabilityParams p;
    p.citation = citation_options_from(cfg);
    p.nmf = nmf_config_from(cfg);
    p.nmf_restarts = cfg.integer("embed.restarts");
    p.train_ratio = cfg.real("train.ratio");
    p.balance_training = cfg.flag("train.balance");
    p.use_cv = cfg.flag("train.use_cv");
    p.cv = cv_config_from(cfg);
    p.gbdt = gbdt_config_from(cfg);
    p.min_rows_per_type = cfg.integer("train.min_rows_per_type");
    p.min_cases = cfg.integer("judge-test.min_cases");
    p.kappa = cfg.real("judge-test.kappa");
    p.alpha = cfg.real("judge-test.alpha");
    p.n_repetitions = cfg.integer("judge-test.repetitions");
    p.n_bootstrap = cfg.integer("evaluate.bootstrap");
    return p;
}

std::vector<int> guarded_rows(const DesignMatrix& design,
                              const std::set<std::string>& excluded) {
    std::vector<int> kept;
    for (int i = 0; i < design.n_rows(); ++i)
        if (!excluded.count(design.case_ids[static_cast<std::size_t>(i)]))
            kept.push_back(i);
    return kept;
}

bool has_both_classes(const Eigen::VectorXd& y) {
    bool zero = false, one = false;
    for (Eigen::Index i = 0; i < y.size(); ++i) (y(i) == 1.0 ? one : zero) = true;
    return zero && one;
}

// ---------------------------------------------------------------- stages

void run_ingest(const RunConfig& cfg, const fs::path& out) {
    StageWriter stage("ingest", cfg, {"io"}, 0, out);
    const fs::path cases = cfg.text("io.cases");
    const fs::path judges = cfg.text("io.judges");
    if (cases.empty() || judges.empty())
        throw std::invalid_argument("ingest needs io.cases and io.judges");
    stage.input(cases);
    stage.input(judges);

    LoadedDataset loaded =
        load_dataset(cases, judges, file_format_from_string(cfg.text("io.format")));
    save_cases_csv(loaded.data, out / "cases.csv");
    save_judges_csv(loaded.data, out / "judges.csv");
    write_file_atomic(out / "load_report.json", loaded.report.to_json() + "\n");

    stage.output(out / "cases.csv");
    stage.output(out / "judges.csv");
    stage.output(out / "load_report.json");
    stage.finish();
}

void run_simulate(const RunConfig& cfg, const fs::path& out) {
    StageWriter stage("simulate", cfg, {"simulate"}, cfg.seed("simulate.seed"), out);
    const SimulatedCourt court = simulate_court(court_config_from(cfg));
    save_cases_csv(court.data, out / "cases.csv");
    save_judges_csv(court.data, out / "judges.csv");
    court.truth.write_json(out / "ground_truth.json");
    stage.output(out / "cases.csv");
    stage.output(out / "judges.csv");
    stage.output(out / "ground_truth.json");
    stage.finish();
}

void run_audit_assignment(const RunConfig& cfg, const fs::path& out) {
    StageWriter stage("audit-assignment", cfg, {"assignment"}, 0, out);
    const Dataset data = load_canonical(out);
    stage.input(out / "cases.csv");
    stage.input(out / "judges.csv");

    const AuditReport report = audit_assignment(
        data, label_kind_from_string(cfg.text("assignment.label")),
        static_cast<std::size_t>(cfg.integer("assignment.min_judgments")),
        cfg.real("assignment.alpha"),
        static_cast<std::size_t>(cfg.integer("assignment.min_context_cases")));
    report.write_json(out / "assignment_audit.json");
    report.write_csv(out / "assignment_audit.csv");
    report.write_qq_csv(out / "assignment_qq.csv");

    stage.output(out / "assignment_audit.json");
    stage.output(out / "assignment_audit.csv");
    stage.output(out / "assignment_qq.csv");
    stage.finish();
}

void run_audit_deviation(const RunConfig& cfg, const fs::path& out) {
    StageWriter stage("audit-deviation", cfg, {"deviation"}, 0, out);
    const Dataset data = load_canonical(out);
    stage.input(out / "cases.csv");
    stage.input(out / "judges.csv");

    std::optional<double> p0;
    if (const std::string text = cfg.text("deviation.p0"); text != "pooled")
        p0 = cfg.real("deviation.p0");
    const DeviationAudit audit =
        judge_deviation_test(data, p0, cfg.real("deviation.alpha"));
    audit.write_csv(out / "deviation.csv");
    const DeviationSummary summary =
        deviation_summary(audit, static_cast<std::size_t>(cfg.integer("deviation.bins")));
    summary.write_json(out / "deviation_summary.json");
    summary.write_histogram_csv(out / "deviation_hist.csv");

    stage.output(out / "deviation.csv");
    stage.output(out / "deviation_summary.json");
    stage.output(out / "deviation_hist.csv");
    stage.finish();
}

void run_embed(const RunConfig& cfg, const fs::path& out) {
    StageWriter stage("embed", cfg, {"embed"}, cfg.seed("embed.seed"), out);
    const Dataset data = load_canonical(out);
    stage.input(out / "cases.csv");
    stage.input(out / "judges.csv");

    const CitationMatrix matrix = build_citation_matrix(data, citation_options_from(cfg));
    matrix.save(out / "citation_matrix");
    const NmfModel model = nmf_fit_restarts(matrix.values, nmf_config_from(cfg),
                                            cfg.integer("embed.restarts"));
    model.save(out / "nmf_model");
    const auto embeddings = judge_embeddings(matrix, model);
    write_embeddings_csv(out / "embeddings.csv", embeddings);

    json summary;
    summary["n_judges"] = matrix.judges.size();
    summary["n_reference_cases"] = matrix.reference_cases.size();
    summary["n_embedded"] = embeddings.size();
    summary["k"] = model.config.k;
    summary["objective"] = model.objective_trace.back();
    summary["reconstruction_error"] = reconstruction_error(matrix.values, model);
    write_file_atomic(out / "embed_summary.json", summary.dump(2) + "\n");

    stage.output(out / "citation_matrix");
    stage.output(out / "nmf_model");
    stage.output(out / "embeddings.csv");
    stage.output(out / "embed_summary.json");
    stage.finish();
}

void run_train(const RunConfig& cfg, const fs::path& out) {
    StageWriter stage("train", cfg, {"embed", "train"}, cfg.seed("train.seed"), out);
    const Dataset data = load_canonical(out);
    require_artifact(out / "embeddings.csv", "embed");
    stage.input(out / "cases.csv");
    stage.input(out / "judges.csv");
    stage.input(out / "embeddings.csv");

    const auto embeddings = read_embeddings_csv(out / "embeddings.csv");
    const std::set<std::string> excluded =
        early_window_case_ids(data, cfg.real("embed.fraction"));
    const int min_rows = cfg.integer("train.min_rows_per_type");
    const bool use_cv = cfg.flag("train.use_cv");
    const Rng root(cfg.seed("train.seed"));

    fs::create_directories(out / "models");
    std::vector<CasePrediction> predictions;
    json summary = json::array();
    std::string chosen_type;
    int chosen_n_test = 0;
    DesignMatrix chosen_train, chosen_test;

    for (int t = 0; t < kNumCaseTypes; ++t) {
        const auto type = static_cast<CaseType>(t);
        DesignMatrix design = embedding_design(data, type, embeddings);
        design = design.subset(guarded_rows(design, excluded));
        if (design.n_rows() < min_rows || !has_both_classes(design.y)) continue;

        Rng split_rng = root.child(100 + static_cast<std::uint64_t>(t));
        const auto [train_idx, test_idx] =
            split_train_test(design.n_rows(), cfg.real("train.ratio"), split_rng);
        DesignMatrix train = design.subset(train_idx);
        const DesignMatrix test = design.subset(test_idx);
        if (!has_both_classes(train.y) || test.n_rows() == 0) continue;
        if (cfg.flag("train.balance")) {
            Rng balance_rng = root.child(200 + static_cast<std::uint64_t>(t));
            train = train.subset(balance_downsample(train.y, balance_rng));
        }

        GbdtModel model;
        GbdtConfig used;
        double cv_accuracy = 0.0;
        if (use_cv) {
            GbdtCvConfig cv = cv_config_from(cfg);
            cv.seed = root.child(300 + static_cast<std::uint64_t>(t)).next_u64();
            GbdtCvResult result = fit_gbdt_cv(train.X, train.y, cv, train.feature_names);
            model = std::move(result.model);
            used = result.best_config;
            cv_accuracy = result.best_accuracy;
        } else {
            used = gbdt_config_from(cfg);
            model = fit_gbdt(train.X, train.y, used, train.feature_names);
        }

        const std::string type_name = to_string(type);
        model.save(out / "models" / ("type_" + type_name + ".json"));
        const Eigen::VectorXd probs = model.predict_proba(test.X);
        for (int i = 0; i < test.n_rows(); ++i) {
            const auto row = static_cast<std::size_t>(i);
            predictions.push_back({test.case_ids[row], test.judge_ids[row], probs(i),
                                   test.y(i) == 1.0 ? 1 : 0});
        }

        summary.push_back({{"type", type_name},
                           {"n_train", train.n_rows()},
                           {"n_test", test.n_rows()},
                           {"cv_accuracy", cv_accuracy},
                           {"n_estimators", used.n_estimators},
                           {"max_depth", used.max_depth},
                           {"learning_rate", used.learning_rate}});
        if (test.n_rows() > chosen_n_test) {
            chosen_n_test = test.n_rows();
            chosen_type = type_name;
            chosen_train = train;
            chosen_test = test;
        }
    }
    if (predictions.empty())
        throw std::runtime_error("no case type produced a usable model");

    write_predictions_csv(out / "test_predictions.csv", predictions);
    json summary_doc;
    summary_doc["models"] = std::move(summary);
    summary_doc["explained_type"] = chosen_type;
    write_file_atomic(out / "training_summary.json", summary_doc.dump(2) + "\n");

    // feature rows of the explained type, for the attribution stage
    std::string design_text = "role,case_id,judge_id,label";
    for (const auto& name : chosen_train.feature_names) design_text += ',' + name;
    design_text += '\n';
    const auto append_rows = [&design_text](const DesignMatrix& m, const char* role) {
        for (int i = 0; i < m.n_rows(); ++i) {
            const auto row = static_cast<std::size_t>(i);
            design_text += std::string(role) + ',' + m.case_ids[row] + ',' +
                           m.judge_ids[row] + ',' + (m.y(i) == 1.0 ? "1" : "0");
            for (Eigen::Index c = 0; c < m.X.cols(); ++c)
                design_text += ',' + format_double(m.X(i, c));
            design_text += '\n';
        }
    };
    append_rows(chosen_train, "train");
    append_rows(chosen_test, "test");
    write_file_atomic(out / "explain_design.csv", design_text);

    stage.output(out / "models");
    stage.output(out / "test_predictions.csv");
    stage.output(out / "training_summary.json");
    stage.output(out / "explain_design.csv");
    stage.finish();
}

void run_evaluate(const RunConfig& cfg, const fs::path& out) {
    StageWriter stage("evaluate", cfg, {"evaluate"}, cfg.seed("evaluate.seed"), out);
    require_artifact(out / "test_predictions.csv", "train");
    stage.input(out / "test_predictions.csv");

    const auto predictions = read_predictions_csv(out / "test_predictions.csv");
    Eigen::VectorXd labels(static_cast<Eigen::Index>(predictions.size()));
    for (std::size_t i = 0; i < predictions.size(); ++i)
        labels(static_cast<Eigen::Index>(i)) = predictions[i].label;

    const Rng root(cfg.seed("evaluate.seed"));
    std::vector<CasePrediction> balanced;
    if (has_both_classes(labels)) {
        Rng balance_rng = root.child(0);
        for (const int idx : balance_downsample(labels, balance_rng))
            balanced.push_back(predictions[static_cast<std::size_t>(idx)]);
    } else {
        balanced = predictions;
    }
    const PredictionEval eval = bin_accuracy(balanced, cfg.integer("evaluate.bootstrap"),
                                             root.child(1).next_u64());
    eval.write_bins_csv(out / "quintiles.csv");
    eval.write_json(out / "evaluation.json");

    stage.output(out / "quintiles.csv");
    stage.output(out / "evaluation.json");
    stage.finish();
}

void run_judge_test(const RunConfig& cfg, const fs::path& out) {
    StageWriter stage("judge-test", cfg, {"judge-test"}, cfg.seed("judge-test.seed"),
                      out);
    require_artifact(out / "test_predictions.csv", "train");
    stage.input(out / "test_predictions.csv");

    const auto predictions = read_predictions_csv(out / "test_predictions.csv");
    const JudgeSignificance significance = judge_significance(
        predictions, cfg.integer("judge-test.min_cases"), cfg.real("judge-test.kappa"),
        cfg.real("judge-test.alpha"), cfg.integer("judge-test.repetitions"),
        cfg.seed("judge-test.seed"));
    significance.write_csv(out / "judge_significance.csv");
    significance.write_json(out / "judge_significance.json");

    std::map<std::string, int> over_counts;
    for (const auto& rep : significance.repetitions)
        for (const auto& judge : rep.per_judge)
            if (judge.flag == PredictabilityFlag::over) ++over_counts[judge.judge_id];
    std::vector<std::string> over_flagged;
    for (const auto& [judge_id, count] : over_counts)
        if (2 * count > significance.n_repetitions) over_flagged.push_back(judge_id);

    json flagged;
    flagged["rule"] = "over in a majority of repetitions";
    flagged["n_repetitions"] = significance.n_repetitions;
    flagged["over_flagged"] = over_flagged;
    write_file_atomic(out / "flagged_judges.json", flagged.dump(2) + "\n");

    stage.output(out / "judge_significance.csv");
    stage.output(out / "judge_significance.json");
    stage.output(out / "flagged_judges.json");
    stage.finish();
}

void run_explain(const RunConfig& cfg, const fs::path& out) {
    StageWriter stage("explain", cfg, {"explain"}, cfg.seed("explain.seed"), out);
    const Dataset data = load_canonical(out);
    require_artifact(out / "embeddings.csv", "embed");
    require_artifact(out / "training_summary.json", "train");
    require_artifact(out / "explain_design.csv", "train");
    stage.input(out / "cases.csv");
    stage.input(out / "judges.csv");
    stage.input(out / "embeddings.csv");
    stage.input(out / "training_summary.json");
    stage.input(out / "explain_design.csv");

    // embedding-attribute regressions over the embedded judges
    const auto embeddings = read_embeddings_csv(out / "embeddings.csv");
    if (data.cases.empty()) throw std::runtime_error("canonical dataset has no cases");
    Date reference = data.cases.front().decision_date;
    for (const auto& rec : data.cases)
        reference = std::max(reference, rec.decision_date);
    Eigen::MatrixXd E(static_cast<Eigen::Index>(embeddings.size()),
                      embeddings.begin()->second.size());
    std::vector<JudgeAttributes> attributes;
    Eigen::Index row = 0;
    for (const auto& [judge_id, vec] : embeddings) {
        const JudgeProfile& profile = data.judge_or_throw(judge_id);
        const auto case_indices = data.cases_of_judge(judge_id);
        int wins = 0;
        for (const std::size_t idx : case_indices) wins += data.cases[idx].outcome;
        const double years =
            std::max(years_between(profile.appointment_date, reference), 0.5);
        JudgeAttributes attr;
        attr.judge_id = judge_id;
        attr.experience = years;
        attr.win_rate = case_indices.empty()
                            ? 0.0
                            : static_cast<double>(wins) /
                                  static_cast<double>(case_indices.size());
        attr.workload = static_cast<double>(case_indices.size()) / years;
        attr.gender_male = profile.gender_male;
        attr.party_republican = profile.party_republican;
        attr.promoted = profile.promoted_as_of(reference) ? 1 : 0;
        attributes.push_back(std::move(attr));
        E.row(row++) = vec.transpose();
    }
    const BiographicsReport biographics =
        explain_biographics(E, attributes, cfg.real("explain.l2"));
    biographics.write_csv(out / "biographics.csv");

    // per-case attributions of the explained type's model
    const json summary = json::parse(read_file(out / "training_summary.json"));
    const std::string type_name = summary.at("explained_type").get<std::string>();
    const GbdtModel model =
        GbdtModel::load(out / "models" / ("type_" + type_name + ".json"));

    const std::vector<std::string> lines = read_lines(out / "explain_design.csv");
    const auto header = split_csv_line(lines.at(0));
    if (header.size() < 5 || header[0] != "role")
        throw std::runtime_error("unexpected header in explain_design.csv");
    const std::vector<std::string> feature_names(header.begin() + 4, header.end());
    std::vector<std::vector<double>> train_rows, test_rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != header.size())
            throw std::runtime_error("ragged row in explain_design.csv");
        std::vector<double> features;
        for (std::size_t c = 4; c < fields.size(); ++c)
            features.push_back(std::stod(fields[c]));
        (fields[0] == "train" ? train_rows : test_rows).push_back(std::move(features));
    }
    if (train_rows.empty() || test_rows.empty())
        throw std::runtime_error("explain_design.csv lacks train or test rows");

    const auto to_matrix = [&](const std::vector<std::vector<double>>& rows,
                               const std::vector<std::size_t>& picks) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(picks.size()),
                          static_cast<Eigen::Index>(feature_names.size()));
        for (std::size_t i = 0; i < picks.size(); ++i)
            for (std::size_t c = 0; c < feature_names.size(); ++c)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                    rows[picks[i]][c];
        return m;
    };
    const Rng root(cfg.seed("explain.seed"));
    Rng background_rng = root.child(0);
    Rng rows_rng = root.child(1);
    const std::size_t n_background =
        std::min<std::size_t>(train_rows.size(),
                              static_cast<std::size_t>(cfg.integer("explain.background_rows")));
    const std::size_t n_rows = std::min<std::size_t>(
        test_rows.size(), static_cast<std::size_t>(cfg.integer("explain.rows")));
    const Eigen::MatrixXd background = to_matrix(
        train_rows, background_rng.sample_without_replacement(train_rows.size(),
                                                              n_background));
    const Eigen::MatrixXd explained = to_matrix(
        test_rows, rows_rng.sample_without_replacement(test_rows.size(), n_rows));

    const std::string method_text = cfg.text("explain.shapley");
    ShapleyMethod method;
    if (method_text == "exact") method = ShapleyMethod::exact_enumeration;
    else if (method_text == "sampling") method = ShapleyMethod::permutation_sampling;
    else throw std::invalid_argument("explain.shapley must be exact or sampling");

    const ShapleyReport shapley = shapley_importance(
        [&model](const Eigen::MatrixXd& X) { return model.predict_proba(X); },
        explained, background, method, cfg.integer("explain.samples"),
        root.child(2).next_u64(), feature_names);
    write_file_atomic(out / "shapley.csv", shapley.to_csv());

    std::string importance = "feature,mean_abs\n";
    const Eigen::VectorXd mean_abs = shapley.mean_abs();
    for (std::size_t f = 0; f < feature_names.size(); ++f)
        importance += feature_names[f] + ',' +
                      format_double(mean_abs(static_cast<Eigen::Index>(f))) + '\n';
    write_file_atomic(out / "shapley_importance.csv", importance);

    stage.output(out / "biographics.csv");
    stage.output(out / "shapley.csv");
    stage.output(out / "shapley_importance.csv");
    stage.finish();
}

void run_power(const RunConfig& cfg, const fs::path& out) {
    StageWriter stage("power", cfg,
                      {"power", "simulate", "embed", "train", "judge-test"},
                      cfg.seed("power.seed"), out);

    const std::string sweep = cfg.text("power.sweep");
    const std::map<std::string, void (*)(CourtConfig&, double)> appliers = {
        {"planted_bias", [](CourtConfig& c, double v) { c.planted_bias = v; }},
        {"bias_fraction", [](CourtConfig& c, double v) { c.bias_fraction = v; }},
        {"assignment_strength",
         [](CourtConfig& c, double v) { c.assignment_strength = v; }},
        {"date_drift", [](CourtConfig& c, double v) { c.date_drift = v; }},
        {"ideology_link", [](CourtConfig& c, double v) { c.ideology_bias_link = v; }},
        {"cases",
         [](CourtConfig& c, double v) { c.n_cases = static_cast<int>(std::llround(v)); }},
        {"judges",
         [](CourtConfig& c, double v) { c.n_judges = static_cast<int>(std::llround(v)); }},
        {"citations_per_case",
         [](CourtConfig& c, double v) {
             c.citations_per_case = static_cast<int>(std::llround(v));
         }},
    };
    const auto applier = appliers.find(sweep);
    if (applier == appliers.end()) {
        std::string known;
        for (const auto& entry : appliers)
            known += (known.empty() ? "" : ", ") + entry.first;
        throw std::invalid_argument("power.sweep must be one of: " + known);
    }

    const std::string stage_text = cfg.text("power.stage");
    PipelineStage scored;
    if (stage_text == "assignment") scored = PipelineStage::assignment;
    else if (stage_text == "deviation") scored = PipelineStage::deviation;
    else if (stage_text == "predictability") scored = PipelineStage::predictability;
    else
        throw std::invalid_argument(
            "power.stage must be assignment, deviation or predictability");

    std::vector<PowerGridPoint> grid;
    const auto value_texts = [&] {
        std::vector<std::string> texts;
        std::istringstream in(cfg.text("power.values"));
        std::string part;
        while (std::getline(in, part, ',')) texts.push_back(part);
        return texts;
    }();
    for (std::size_t i = 0; i < value_texts.size(); ++i) {
        CourtConfig court = court_config_from(cfg);
        applier->second(court, cfg.real_list("power.values")[i]);
        grid.push_back({sweep + "=" + value_texts[i], court});
    }

    PowerOptions options;
    options.n_replicates = cfg.integer("power.replicates");
    options.alpha = cfg.real("power.alpha");
    options.by_alpha = cfg.real("power.by_alpha");
    options.predictability = predictability_params_from(cfg);
    options.seed = cfg.seed("power.seed");

    const PowerStudy study = power_study(grid, scored, options);
    study.write_csv(out / "power.csv");
    study.write_json(out / "power.json");

    stage.output(out / "power.csv");
    stage.output(out / "power.json");
    stage.finish();
}

void run_report(const RunConfig& cfg, const fs::path& out) {
    StageWriter stage("report", cfg, {}, 0, out);
    fs::create_directories(out / "report");

    json doc;
    doc["present"] = json::array();
    doc["missing"] = json::array();
    json headline = json::object();

    const auto note = [&](const std::string& name, bool present) {
        doc[present ? "present" : "missing"].push_back(name);
        return present;
    };
    const auto copy_table = [&](const std::string& name, const std::string& as) {
        if (!note(name, fs::exists(out / name))) return;
        stage.input(out / name);
        write_file_atomic(out / "report" / as, read_file(out / name));
        stage.output(out / "report" / as);
    };

    if (note("cases.csv", fs::exists(out / "cases.csv"))) {
        stage.input(out / "cases.csv");
        headline["n_cases"] = read_lines(out / "cases.csv").size() - 1;
    }
    if (note("judges.csv", fs::exists(out / "judges.csv"))) {
        stage.input(out / "judges.csv");
        headline["n_judges"] = read_lines(out / "judges.csv").size() - 1;
    }
    if (note("assignment_audit.json", fs::exists(out / "assignment_audit.json"))) {
        stage.input(out / "assignment_audit.json");
        const json audit = json::parse(read_file(out / "assignment_audit.json"));
        headline["assignment"] = {
            {"n_tests", audit.at("n_tests")},
            {"qq_pearson_r", audit.at("qq").at("pearson_r")},
            {"raw_fraction_below_alpha", audit.at("raw_fraction_below_alpha")}};
        for (const auto& method :
             {"bonferroni", "benjamini_hochberg", "benjamini_yekutieli"})
            headline["assignment"][std::string(method) + "_rejected"] =
                audit.at("corrected").at(method).at("n_rejected");
    }
    if (note("deviation_summary.json", fs::exists(out / "deviation_summary.json"))) {
        stage.input(out / "deviation_summary.json");
        const json dev = json::parse(read_file(out / "deviation_summary.json"));
        headline["deviation"] = {
            {"n_judges", dev.at("n_judges")},
            {"fraction_significant", dev.at("fraction_significant")},
            {"fraction_significant_bh", dev.at("fraction_significant_bh")}};
    }
    if (note("evaluation.json", fs::exists(out / "evaluation.json"))) {
        stage.input(out / "evaluation.json");
        const json eval = json::parse(read_file(out / "evaluation.json"));
        headline["evaluation"] = {{"overall_accuracy", eval.at("overall_accuracy")},
                                  {"n_cases", eval.at("n_cases")}};
    }
    if (note("flagged_judges.json", fs::exists(out / "flagged_judges.json"))) {
        stage.input(out / "flagged_judges.json");
        const json flagged = json::parse(read_file(out / "flagged_judges.json"));
        headline["judge_test"] = {
            {"n_over_flagged", flagged.at("over_flagged").size()},
            {"over_flagged", flagged.at("over_flagged")}};
    }
    if (note("ground_truth.json", fs::exists(out / "ground_truth.json"))) {
        stage.input(out / "ground_truth.json");
        const json truth = json::parse(read_file(out / "ground_truth.json"));
        headline["synthetic_truth"] = {{"n_planted", truth.at("planted").size()}};
    }

    copy_table("assignment_qq.csv", "qq.csv");
    copy_table("deviation_hist.csv", "deviation_histogram.csv");
    copy_table("quintiles.csv", "quintile_accuracy.csv");
    copy_table("biographics.csv", "biographics.csv");
    copy_table("shapley_importance.csv", "shapley_importance.csv");
    copy_table("power.csv", "power.csv");

    // per-judge accuracy table: repetition means with interval bounds
    if (note("judge_significance.csv", fs::exists(out / "judge_significance.csv"))) {
        stage.input(out / "judge_significance.csv");
        const auto lines = read_lines(out / "judge_significance.csv");
        struct Acc {
            int n = 0;
            double accuracy = 0, ci_low = 0, ci_high = 0;
            int n_over = 0;
        };
        std::map<std::string, Acc> per_judge;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto fields = split_csv_line(lines[i]);
            if (fields.size() < 10) continue;
            Acc& acc = per_judge[fields[1]];
            ++acc.n;
            acc.accuracy += std::stod(fields[4]);
            acc.ci_low += std::stod(fields[5]);
            acc.ci_high += std::stod(fields[6]);
            acc.n_over += fields[9] == "over" ? 1 : 0;
        }
        std::vector<std::pair<std::string, Acc>> rows(per_judge.begin(),
                                                      per_judge.end());
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
            const double ma = a.second.accuracy / a.second.n;
            const double mb = b.second.accuracy / b.second.n;
            return ma != mb ? ma > mb : a.first < b.first;
        });
        std::string table =
            "judge_id,n_repetitions,mean_accuracy,mean_ci_low,mean_ci_high,"
            "n_flagged_over\n";
        for (const auto& [judge_id, acc] : rows)
            table += judge_id + ',' + std::to_string(acc.n) + ',' +
                     format_double(acc.accuracy / acc.n) + ',' +
                     format_double(acc.ci_low / acc.n) + ',' +
                     format_double(acc.ci_high / acc.n) + ',' +
                     std::to_string(acc.n_over) + '\n';
        write_file_atomic(out / "report" / "judge_accuracy.csv", table);
        stage.output(out / "report" / "judge_accuracy.csv");
    }

    doc["headline"] = std::move(headline);
    write_file_atomic(out / "report" / "report.json", doc.dump(2) + "\n");
    stage.output(out / "report" / "report.json");
    stage.finish();
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& stage_catalog() {
    static const std::vector<std::pair<std::string, std::string>> kStages = {
        {"ingest", "validate raw case/judge files into the canonical dataset"},
        {"simulate", "draw a synthetic court with known ground truth"},
        {"audit-assignment", "binomial tests of label balance per judge-context"},
        {"audit-deviation", "per-judge win-rate deviation tests"},
        {"embed", "early-career citation matrix and its factorization"},
        {"train", "per-case-type outcome models on the embedded judges"},
        {"evaluate", "confidence-quintile accuracy with bootstrap intervals"},
        {"judge-test", "per-judge predictability significance over repetitions"},
        {"explain", "attribute regressions and per-case attributions"},
        {"power", "detection power of a stage across simulated courts"},
        {"report", "aggregate completed artifacts into plot-ready tables"},
    };
    return kStages;
}

void run_stage(const std::string& stage, const RunConfig& cfg, const fs::path& out) {
    if (stage == "ingest") return run_ingest(cfg, out);
    if (stage == "simulate") return run_simulate(cfg, out);
    if (stage == "audit-assignment") return run_audit_assignment(cfg, out);
    if (stage == "audit-deviation") return run_audit_deviation(cfg, out);
    if (stage == "embed") return run_embed(cfg, out);
    if (stage == "train") return run_train(cfg, out);
    if (stage == "evaluate") return run_evaluate(cfg, out);
    if (stage == "judge-test") return run_judge_test(cfg, out);
    if (stage == "explain") return run_explain(cfg, out);
    if (stage == "power") return run_power(cfg, out);
    if (stage == "report") return run_report(cfg, out);
    throw std::invalid_argument("unknown stage '" + stage + "'");
}

}  // namespace courtaudit::cli
