#pragma once

#include <optional>

#include "iaei/optimizer.hpp"
#include "iaei/types.hpp"

namespace iaei {

struct EstimatorConfig {
    double gamma = 0.0;
    PenaltyVariant variant = PenaltyVariant::Basic;
    SearchConfig search;  // gamma/variant overwritten from the fields above
};

// The dataset a method actually optimizes over, plus mode and (for iaei) the
// predictions. Environments are ordered by env_id and rows are sorted into a
// canonical content order, so fits are invariant to input permutations.
struct PreparedView {
    MultiEnvDataset data;
    std::optional<Imputations> imputations;
    ObjectiveMode mode = ObjectiveMode::Complete;
};

// oracle     -> untouched fully labeled data (OracleNeedsLabels otherwise)
// eills_observe -> labeled rows only
// eills_impute  -> every row labeled with h(x), including observed rows
// eills_mix     -> observed y where available, h(x) elsewhere
// iaei          -> original rows plus predictions, adjusted mode
PreparedView prepare_view(Method method, const MultiEnvDataset& data,
                          const Imputations* imputations = nullptr);

FitResult fit(Method method, const MultiEnvDataset& data,
              const Imputations* imputations, const EstimatorConfig& config);

}  // namespace iaei
