export { ConfigError, DecodeError, ModelError } from "./errors.js";
export {
  MarkerTracker,
  createEstimator,
  registerEstimator,
  type EstimatorFactory,
  type Landmark,
  type LumaFrame,
  type MarkerTrackerOptions,
  type PoseEstimator,
} from "./estimators.js";
export {
  extractKeypoints,
  formatDoc,
  runExtract,
  type AdapterConfig,
  type ExtractOptions,
} from "./extract.js";
export {
  FrameSchema,
  JointSchema,
  KeypointDocSchema,
  type KeypointDoc,
  type KeypointJoint,
} from "./schema.js";
export { parseY4m, type Y4mVideo } from "./y4m.js";
