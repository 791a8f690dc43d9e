// Wire types served by the game service. The client treats every styled
// value (diameter, hue, opacity) as opaque server truth.

export type Vec2 = [number, number];
export type Vec3 = [number, number, number];

export interface BubblePayload {
  id: string;
  pos: Vec3;
  ppm: number;
  diameter_m: number;
  hue_deg: number;
  opacity: number;
  updated_t: number;
}

export interface DevicePayload {
  id: string;
  kind: string;
  position: Vec3;
  state: "on" | "off";
  orientation?: Vec3;
}

export interface ReadingPayload {
  device_id: string;
  ts_ms: number;
  co2_ppm?: number;
  temp_c?: number;
  rh_pct?: number;
  status: string;
}

export interface AvatarPayload {
  pos: Vec2;
  target: Vec2 | null;
}

export interface RoomPayload {
  dims_m: Vec3;
  cell_m: number;
  partitions?: { min: Vec3; max: Vec3 }[];
}

export interface EventRecord {
  seq: number;
  t: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface CompletionPayload {
  complete: boolean;
  completed_t: number | null;
  target_ppm: number;
  sustain_s: number;
}

export interface SessionSnapshot {
  session_id: string;
  scenario: string;
  mode: string;
  status: string;
  ended: boolean;
  t: number;
  time_scale: number;
  room: RoomPayload;
  avatar: AvatarPayload;
  devices: DevicePayload[];
  bubbles: BubblePayload[];
  readings: Record<string, ReadingPayload>;
  completion: CompletionPayload;
  seq: number;
}

export interface HeatmapPayload {
  height: string;
  height_m: number;
  positions: Vec2[];
  values: number[][];
  hues: number[][];
}

export type HeightLayer = "G" | "T" | "C";
