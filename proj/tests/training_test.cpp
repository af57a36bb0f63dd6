#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "tcm/training.hpp"

using namespace tcm;

namespace {

TrainConfig tiny_config() {
    TrainConfig cfg;
    cfg.d = 4;
    cfg.dropout = 0.0;
    cfg.stage_epochs = {1, 1, 1};
    cfg.batch_size = 2;
    return cfg;
}

std::vector<Instance> tiny_corpus() {
    SynthOptions so;
    so.n_instances = 4;
    so.n_rows = 2;
    so.n_types = 3;
    return synth_corpus(so);
}

}  // namespace

TEST(Config, ParsesKeysAndComments) {
    std::istringstream in("# schedule\nd = 8\nlr=0.002\nstage2_lambda1 = 0.3\nstage3_epochs = 2\nno_back_trans = true\n");
    const TrainConfig cfg = parse_train_config(in);
    EXPECT_EQ(cfg.d, 8u);
    EXPECT_DOUBLE_EQ(cfg.lr, 0.002);
    EXPECT_DOUBLE_EQ(cfg.stages[1].lambda1, 0.3);
    EXPECT_EQ(cfg.stage_epochs[2], 2u);
    EXPECT_TRUE(cfg.no_back_trans);
}

TEST(Config, FormatRoundTrips) {
    TrainConfig cfg = tiny_config();
    cfg.lr = 0.0123;
    std::istringstream in(format_train_config(cfg));
    EXPECT_EQ(format_train_config(parse_train_config(in)), format_train_config(cfg));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    TrainConfig cfg;
    EXPECT_THROW(set_config_value(cfg, "learning_rate", "1"), ConfigError);
    EXPECT_THROW(set_config_value(cfg, "d", "-3"), ConfigError);
    EXPECT_THROW(set_config_value(cfg, "lr", "fast"), ConfigError);
    EXPECT_THROW(set_config_value(cfg, "stage4_epochs", "1"), ConfigError);
    std::istringstream in("d 8\n");
    EXPECT_THROW(parse_train_config(in), ConfigError);
}

TEST(Config, LambdaRangeIsValidated) {
    EXPECT_THROW(validate(StageWeights{0.7, 0.5}), ConfigError);
    EXPECT_THROW(validate(StageWeights{-0.1, 0.5}), ConfigError);
    EXPECT_NO_THROW(validate(StageWeights{0.5, 0.5}));
    TrainConfig cfg;
    cfg.stages[2] = {0.8, 0.8};
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, DefaultScheduleWeights) {
    const TrainConfig cfg;
    EXPECT_DOUBLE_EQ(cfg.stages[0].lambda1, 0.0);
    EXPECT_DOUBLE_EQ(cfg.stages[0].lambda2, 1.0);
    EXPECT_NEAR(cfg.stages[2].backtrans(), 0.1, 1e-15);
}

TEST(Config, NoBackTransRenormalises) {
    TrainConfig cfg;
    cfg.no_back_trans = true;
    const StageWeights w = cfg.effective_weights(2);
    EXPECT_NEAR(w.lambda1, 0.4 / 0.9, 1e-15);
    EXPECT_NEAR(w.backtrans(), 0.0, 1e-15);
}

TEST(Joint, WeightedSum) {
    EXPECT_NEAR(joint_objective(1.0, 2.0, 3.0, StageWeights{0.4, 0.5}), 0.4 + 1.0 + 0.3, 1e-15);
    EXPECT_DOUBLE_EQ(joint_objective(9.0, 2.0, 7.0, StageWeights{0.0, 1.0}), 2.0);
    Tape t;
    Var v = joint_objective(t.constant(Tensor(1, 1, 1.0)), t.constant(Tensor(1, 1, 2.0)),
                            t.constant(Tensor(1, 1, 3.0)), StageWeights{0.4, 0.5});
    EXPECT_NEAR(v.scalar(), 1.7, 1e-15);
}

TEST(BackTranslation, RequiresTablePrime) {
    const auto corpus = tiny_corpus();
    TrainConfig cfg = tiny_config();
    Model m(cfg.model_config(), build_vocab(corpus, 1), 1);
    Tape t;
    EXPECT_THROW(back_translation_loss_given(t, m, Table{}, corpus[0].y_prime, corpus[0].y_prime,
                                             ForwardContext::eval()),
                 ConfigError);
    EXPECT_FALSE(back_translation_loss_given(t, m, corpus[0].x_prime, Tokens{}, corpus[0].y_prime,
                                             ForwardContext::eval())
                     .has_value());
}

TEST(Train, LogHasOneRowPerStepAndStagesInOrder) {
    const auto corpus = tiny_corpus();
    const TrainConfig cfg = tiny_config();
    Model m(cfg.model_config(), build_vocab(corpus, 1), cfg.seed);
    const TrainResult r = train(m, corpus, cfg);
    ASSERT_EQ(r.log.size(), 6u);  // 2 batches x 3 stages
    EXPECT_EQ(r.log.front().stage, 1u);
    EXPECT_EQ(r.log.back().stage, 3u);
    EXPECT_FALSE(r.log.front().record.has_value());
    EXPECT_TRUE(r.log.back().backtrans.has_value());
    for (const auto& row : r.log) EXPECT_TRUE(std::isfinite(row.joint));
    EXPECT_NE(train_log_csv_row(r.log[0]).find(','), std::string::npos);
    EXPECT_EQ(train_log_csv_header(), "step,epoch,stage,loss_record,loss_style,loss_backtrans,joint,lr");
}

TEST(Train, SameSeedGivesIdenticalLogs) {
    const auto corpus = tiny_corpus();
    const TrainConfig cfg = tiny_config();
    auto run = [&] {
        Model m(cfg.model_config(), build_vocab(corpus, 1), cfg.seed);
        std::string csv;
        for (const auto& row : train(m, corpus, cfg).log) csv += train_log_csv_row(row);
        return csv;
    };
    EXPECT_EQ(run(), run());
}

TEST(Train, ArchitectureMustMatchConfig) {
    const auto corpus = tiny_corpus();
    TrainConfig cfg = tiny_config();
    Model m(cfg.model_config(), build_vocab(corpus, 1), 1);
    cfg.no_inter_att = true;
    EXPECT_THROW(train(m, corpus, cfg), ConfigError);
}

TEST(TeacherForcing, CountsIncludeEos) {
    const auto corpus = tiny_corpus();
    const TrainConfig cfg = tiny_config();
    Model m(cfg.model_config(), build_vocab(corpus, 1), 1);
    const auto out = teacher_forced_predict(m, corpus[0].x, corpus[0].y_prime, corpus[0].y_aux);
    EXPECT_EQ(out.total, corpus[0].y_aux.size() + 1);
    EXPECT_EQ(out.predicted.size(), corpus[0].y_aux.size());
    EXPECT_LE(out.correct, out.total);
}
