def answer_question(video, possible_answers):
    crops = video.find("dancer")
    tracks = video.track_objects(crops)
    return len(tracks)
