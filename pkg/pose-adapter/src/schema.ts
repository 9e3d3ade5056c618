import { z } from "zod";

/**
 * Wire format consumed by the gait pipeline's keypoint loader, with the
 * adapter's own guarantees layered on: both toes in every record and
 * frame indices gapless from zero.
 */

export const JointSchema = z.object({
  x: z.number().finite(),
  y: z.number().finite(),
  c: z.number().min(0).max(1),
});

export const FrameSchema = z.object({
  frame: z.number().int().nonnegative(),
  t: z.number().finite().nonnegative(),
  joints: z
    .record(z.string().min(1), JointSchema)
    .refine((j) => "left_toe" in j && "right_toe" in j, {
      message: "every frame needs both left_toe and right_toe",
    }),
});

export const KeypointDocSchema = z
  .object({
    fps: z.number().positive().finite(),
    source_id: z.string().min(1),
    frames: z.array(FrameSchema),
  })
  .superRefine((doc, ctx) => {
    doc.frames.forEach((f, i) => {
      if (f.frame !== i) {
        ctx.addIssue({
          code: "custom",
          path: ["frames", i, "frame"],
          message: `frame indices must be gapless 0..n-1, got ${f.frame} at position ${i}`,
        });
      }
    });
  });

export type KeypointDoc = z.infer<typeof KeypointDocSchema>;
export type KeypointJoint = z.infer<typeof JointSchema>;
