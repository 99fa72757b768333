#include <stdio.h>
#include "mhscg.h"

int main(void) {
    size_t dims[2] = {3, 4};
    MhscgDataset *ds = NULL;
    if (mhscg_dataset_synth(10, 3, dims, 2, 0.3, 7, &ds) != MHSCG_STATUS_OK) {
        fprintf(stderr, "%s\n", mhscg_last_error());
        return 1;
    }
    MhscgOptions opts = mhscg_options_default();
    opts.kmeans_restarts = 5;
    MhscgResult *res = NULL;
    if (mhscg_cluster(ds, &opts, &res) != MHSCG_STATUS_OK) {
        fprintf(stderr, "%s\n", mhscg_last_error());
        mhscg_dataset_free(ds);
        return 1;
    }
    MhscgMetrics m;
    mhscg_result_metrics(res, &m);
    printf("acc=%.4f nmi=%.4f\n", m.acc.mean, m.nmi.mean);

    MhscgStatus bad = mhscg_dataset_add_view(NULL, NULL, 0, 0);
    printf("null=%d\n", (int)bad);

    mhscg_result_free(res);
    mhscg_dataset_free(ds);
    return 0;
}
