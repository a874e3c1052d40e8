def answer_question(video, possible_answers):
    skier_clip = video.filter_object("skier")
    jacket_boxes = skier_clip.find("jacket")
    responses = jacket_boxes.video_query("What color is this jacket?", possible_answers)
    return get_max_key(responses)
