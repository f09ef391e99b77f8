#include <math.h>
#include <stdio.h>

#include "gerber.h"

static int fail(enum GerberStatus s) {
  const char *msg = gerber_last_error();
  fprintf(stderr, "%s: %s\n", gerber_status_string(s), msg ? msg : "");
  return 1;
}

int main(int argc, char **argv) {
  if (argc != 2) {
    fprintf(stderr, "usage: %s returns.csv\n", argv[0]);
    return 2;
  }
  GerberReturns *returns = NULL;
  enum GerberStatus s = gerber_returns_load_csv(argv[1], 0, &returns);
  if (s != GERBER_STATUS_OK) return fail(s);

  GerberMatrix *g = NULL;
  s = gerber_compute(returns, GERBER_VARIANT_GS2, 0.5, &g);
  gerber_returns_free(returns);
  if (s != GERBER_STATUS_OK) return fail(s);

  size_t k = gerber_matrix_assets(g);
  double values[64];
  if (k * k > 64) return 1;
  s = gerber_matrix_values(g, values, k * k);
  if (s != GERBER_STATUS_OK) return fail(s);
  for (size_t i = 0; i < k; i++) {
    char label[64];
    s = gerber_matrix_label(g, i, label, sizeof label, NULL);
    if (s != GERBER_STATUS_OK) return fail(s);
    printf("%s", label);
    for (size_t j = 0; j < k; j++) printf(" %.17g", values[i * k + j]);
    printf("\n");
  }

  GerberPsdReport report;
  s = gerber_matrix_check_psd(g, 0.0, &report);
  if (s != GERBER_STATUS_OK) return fail(s);
  printf("lambda_min %.6g verdict %u\n", report.lambda_min, report.verdict);
  gerber_matrix_free(g);
  return 0;
}
