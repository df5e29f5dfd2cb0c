#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "msfa.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        MsfaStatus s_ = (call);                                            \
        if (s_ != MSFA_STATUS_OK) {                                        \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_,              \
                    msfa_last_error_message());                            \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    enum { H = 12, W = 12, B = 16 };
    static float data[H * W * B];
    for (int i = 0; i < H * W * B; i++) data[i] = (float)(i % 31) / 31.0f;

    MsfaCube *cube = NULL, *bil = NULL, *net = NULL;
    MsfaPattern *pattern = NULL;
    MsfaMosaic *mosaic = NULL;
    MsfaModel *model = NULL;
    double db = 0.0;

    CHECK(msfa_cube_new(H, W, B, data, &cube));
    CHECK(msfa_pattern_default(&pattern));
    CHECK(msfa_mosaic_apply(cube, pattern, &mosaic));
    CHECK(msfa_demosaic_bilinear(mosaic, &bil));
    CHECK(msfa_model_init(0, &model));
    CHECK(msfa_demosaic_net(model, mosaic, &net));
    CHECK(msfa_psnr(bil, net, &db));
    printf("psnr %s\n", isinf(db) ? "inf" : "finite");

    MsfaCube *tiny = NULL;
    MsfaMosaic *tiny_mosaic = NULL;
    MsfaCube *fail = NULL;
    CHECK(msfa_cube_new(2, 2, B, data, &tiny));
    CHECK(msfa_mosaic_apply(tiny, pattern, &tiny_mosaic));
    MsfaStatus s = msfa_demosaic_bilinear(tiny_mosaic, &fail);
    printf("status %d: %s\n", (int)s, msfa_last_error_message());

    msfa_cube_free(cube);
    msfa_cube_free(bil);
    msfa_cube_free(net);
    msfa_cube_free(tiny);
    msfa_mosaic_free(mosaic);
    msfa_mosaic_free(tiny_mosaic);
    msfa_pattern_free(pattern);
    msfa_model_free(model);
    return fail == NULL ? 0 : 1;
}
