#include <stdio.h>
#include "lcsg.h"

int main(void) {
    LcsgDefinitions *defs = NULL;
    LcsgReport *report = NULL;
    LcsgOptions opts = lcsg_default_options();
    opts.samples = 8;
    if (lcsg_definitions_load_catalog("pair_symplectic", &defs) != LCSG_STATUS_OK) {
        fprintf(stderr, "%s\n", lcsg_last_error());
        return 1;
    }
    if (lcsg_run(defs, "lcs-groupoid", opts, &report) != LCSG_STATUS_OK) {
        fprintf(stderr, "%s\n", lcsg_last_error());
        return 1;
    }
    int ok = lcsg_report_passed(report);
    printf("pair_symplectic %s (%zu entries)\n", ok ? "pass" : "fail", lcsg_report_entry_count(report));
    if (lcsg_run(defs, "bogus", opts, &report) != LCSG_STATUS_UNKNOWN_SUITE) {
        return 1;
    }
    lcsg_report_free(report);
    lcsg_definitions_free(defs);
    return ok ? 0 : 1;
}
