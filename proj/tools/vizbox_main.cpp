#include <CLI11.hpp>

#include <cstddef>
#include <iostream>
#include <string>

#include "vizbox/cli.hpp"
#include "vizbox/common.hpp"

using namespace vizbox;

int main(int argc, char** argv) {
    RunConfig cfg;

    // The config file must be applied before CLI11 writes flag values into
    // cfg, so flags override the file. Find it in a pre-pass; the option is
    // still registered below so it parses and shows up in --help.
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) config_path = argv[i + 1];
        else if (a.rfind("--config=", 0) == 0) config_path = a.substr(9);
    }
    try {
        if (!config_path.empty()) apply_config(cfg, load_config_file(config_path));
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    CLI::App app{"adaptive visualization-type and axis recommender over box embeddings"};
    app.require_subcommand(1);
    app.add_option("--config", config_path, "TOML/JSON run configuration file");

    std::size_t n = 2000;
    std::string rulebook = "default";
    double fraction = 2.0 / 3.0;
    std::string train_out, test_out, features;
    std::string role = "unspecified";
    bool negative_polarity = false;

    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
    synth->add_option("--n", n, "number of pairs");
    synth->add_option("--rulebook", rulebook, "default | adaptive | path to a JSON rulebook");
    synth->add_option("--seed", cfg.hyper.seed, "generator seed");
    synth->add_option("--output", cfg.output, "corpus file to write");

    auto* split = app.add_subcommand("split", "split a corpus into train and test parts");
    split->add_option("--corpus", cfg.corpus, "corpus file to split");
    split->add_option("--fraction", fraction, "train fraction, in (0, 1)");
    split->add_option("--seed", cfg.hyper.seed, "shuffle seed");
    split->add_option("--train-output", train_out, "train corpus file");
    split->add_option("--test-output", test_out, "test corpus file");

    auto* extract = app.add_subcommand("extract", "extract per-pair feature vectors");
    extract->add_option("--corpus", cfg.corpus, "corpus file to read");
    extract->add_option("--role", role, "train | test | unspecified");
    extract->add_option("--output", cfg.output, "feature dump to write");

    auto* fit_bins = app.add_subcommand("fit-bins", "fit supervised bins on a train dump");
    fit_bins->add_option("--features", features, "train feature dump");
    fit_bins->add_option("--corpus", cfg.corpus, "labeled corpus the dump came from");
    fit_bins->add_option("--output", cfg.output, "bins file to write");

    auto* build_kg = app.add_subcommand("build-kg", "build the knowledge graph");
    build_kg->add_option("--features", features, "train feature dump");
    build_kg->add_option("--corpus", cfg.corpus, "labeled corpus the dump came from");
    build_kg->add_option("--bins", cfg.bins, "fitted bins file");
    build_kg->add_option("--output", cfg.output, "graph file to write");
    build_kg->add_flag("--negative-polarity", negative_polarity,
                       "also emit false-polarity boolean entities");

    auto* train = app.add_subcommand("train", "train box embeddings on a graph");
    train->add_option("--graph", cfg.graph, "graph file");
    train->add_option("--output", cfg.output, "model file to write");
    train->add_option("--d", cfg.hyper.d, "embedding dimension");
    train->add_option("--gamma", cfg.hyper.gamma, "margin");
    train->add_option("--alpha", cfg.hyper.alpha, "inside-distance weight");
    train->add_option("--beta", cfg.hyper.beta, "box-size weight");
    train->add_option("--k", cfg.hyper.k, "negatives per positive");
    train->add_option("--learning-rate", cfg.hyper.learning_rate, "Adam learning rate");
    train->add_option("--epochs", cfg.hyper.epochs, "training epochs");
    train->add_option("--batch-size", cfg.hyper.batch_size, "minibatch size");
    train->add_option("--seed", cfg.hyper.seed, "training seed");

    auto* recommend = app.add_subcommand("recommend", "recommend axes and chart types");
    auto* evaluate = app.add_subcommand("evaluate", "score a model on a labeled corpus");
    for (auto* sub : {recommend, evaluate}) {
        sub->add_option("--model", cfg.model, "trained model file");
        sub->add_option("--bins", cfg.bins, "bins the model was trained against");
        sub->add_option("--corpus", cfg.corpus, "input corpus");
        sub->add_option("--output", cfg.output, "file to write");
        sub->add_flag("--cross-features,!--no-cross-features", cfg.use_cross_features,
                      "use cross-column feature branches");
        sub->add_flag("--project-columns,!--no-project-columns",
                      cfg.project_columns_before_ds_intersection,
                      "project column boxes before the dataset intersection");
        sub->add_option("--containment-tol", cfg.containment_tol,
                        "slack added around type containment tests");
    }

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) cmd_synth(cfg, n, rulebook);
        else if (split->parsed()) cmd_split(cfg, fraction, train_out, test_out);
        else if (extract->parsed()) cmd_extract(cfg, role);
        else if (fit_bins->parsed()) cmd_fit_bins(cfg, features);
        else if (build_kg->parsed()) cmd_build_kg(cfg, features, negative_polarity);
        else if (train->parsed()) cmd_train(cfg);
        else if (recommend->parsed()) cmd_recommend(cfg);
        else if (evaluate->parsed()) cmd_evaluate(cfg, std::cout);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
